//! ASCII OBJ import: `v` and `f` records only, 1-based indices, polygon
//! faces fan-triangulated on load. Everything else is ignored.

use std::io;
use std::path::Path;

use fptarget_core::{TriangleMesh, Vec3};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: face references vertex {index}, file defines {vertex_count}")]
    IndexOutOfRange { line: usize, index: usize, vertex_count: usize },
}

pub fn read_obj_str(text: &str) -> Result<TriangleMesh, ObjError> {
    let mut mesh = TriangleMesh { vertices: Vec::new(), faces: Vec::new() };
    let mut face_lines = Vec::new();
    for (number, raw) in text.lines().enumerate() {
        let line = number + 1;
        let mut tokens = raw.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut coord = [0.0f64; 3];
                for slot in &mut coord {
                    let token = tokens.next().ok_or_else(|| ObjError::Malformed {
                        line,
                        reason: "vertex needs three coordinates".into(),
                    })?;
                    *slot = token.parse().map_err(|_| ObjError::Malformed {
                        line,
                        reason: format!("bad coordinate '{}'", token),
                    })?;
                }
                mesh.vertices.push(Vec3::new(coord[0], coord[1], coord[2]));
            }
            Some("f") => {
                let mut corners = Vec::new();
                for token in tokens {
                    // `f v`, `f v/vt`, `f v/vt/vn`, `f v//vn`: the vertex
                    // index is always the first field.
                    let field = token.split('/').next().unwrap_or("");
                    let index: usize = field.parse().map_err(|_| ObjError::Malformed {
                        line,
                        reason: format!("bad face index '{}'", token),
                    })?;
                    if index == 0 {
                        return Err(ObjError::Malformed {
                            line,
                            reason: "face indices are 1-based".into(),
                        });
                    }
                    corners.push((line, index));
                }
                if corners.len() < 3 {
                    return Err(ObjError::Malformed {
                        line,
                        reason: format!("face has {} corners, need at least 3", corners.len()),
                    });
                }
                face_lines.push(corners);
            }
            _ => {} // comments, normals, uvs, groups, materials
        }
    }
    for corners in face_lines {
        for &(line, index) in &corners {
            if index > mesh.vertices.len() {
                return Err(ObjError::IndexOutOfRange {
                    line,
                    index,
                    vertex_count: mesh.vertices.len(),
                });
            }
        }
        let anchor = (corners[0].1 - 1) as u32;
        for pair in corners[1..].windows(2) {
            mesh.faces.push([anchor, (pair[0].1 - 1) as u32, (pair[1].1 - 1) as u32]);
        }
    }
    Ok(mesh)
}

pub fn read_obj(path: impl AsRef<Path>) -> Result<TriangleMesh, ObjError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ObjError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_obj_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quads_fan_into_two_triangles() {
        let text = "# unit square\nv 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1/1/1 2/2/1 3/3/1 4/4/1\n";
        let mesh = read_obj_str(text).unwrap();
        assert_eq!(mesh.vertices.len(), 4);
        assert_eq!(mesh.faces, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn malformed_records_name_their_line() {
        assert!(matches!(
            read_obj_str("v 0 0\n"),
            Err(ObjError::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            read_obj_str("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n"),
            Err(ObjError::IndexOutOfRange { line: 4, index: 9, vertex_count: 3 })
        ));
        assert!(matches!(
            read_obj_str("v 0 0 0\nf 0 1 1\n"),
            Err(ObjError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn forward_references_resolve_after_the_whole_file() {
        let text = "f 1 2 3\nv 0 0 0\nv 1 0 0\nv 0 1 0\n";
        let mesh = read_obj_str(text).unwrap();
        assert_eq!(mesh.faces, vec![[0, 1, 2]]);
    }
}
