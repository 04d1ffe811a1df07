//! Binary STL: 80-byte header, little-endian u32 triangle count, then
//! 50 bytes per triangle (normal + 3 vertices as f32 triples, 2 attribute
//! bytes). A valid file is exactly 84 + 50 n bytes.

use std::collections::HashMap;
use std::io;
use std::path::Path;

use fptarget_core::{TriangleMesh, Vec3};
use thiserror::Error;

const HEADER_TEXT: &[u8] = b"fptarget binary STL";
const HEADER_LEN: usize = 80;
const TRIANGLE_LEN: usize = 50;

#[derive(Debug, Error)]
pub enum StlError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("truncated STL: {found} bytes, need at least {needed} (failed at byte offset {offset})")]
    Truncated { offset: usize, needed: usize, found: usize },
    #[error(
        "triangle count mismatch: header at byte offset 80 declares {declared} triangles \
         ({expected} bytes total) but the file has {found} bytes"
    )]
    CountMismatch { declared: u32, expected: usize, found: usize },
    #[error("face {face} references vertex {vertex}, mesh has {vertex_count}")]
    BadFaceIndex { face: usize, vertex: u32, vertex_count: usize },
}

/// Serialize a mesh to binary STL bytes.
pub fn stl_bytes(mesh: &TriangleMesh) -> Result<Vec<u8>, StlError> {
    for (face, tri) in mesh.faces.iter().enumerate() {
        for &v in tri {
            if v as usize >= mesh.vertices.len() {
                return Err(StlError::BadFaceIndex {
                    face,
                    vertex: v,
                    vertex_count: mesh.vertices.len(),
                });
            }
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 4 + TRIANGLE_LEN * mesh.faces.len());
    out.extend_from_slice(HEADER_TEXT);
    out.resize(HEADER_LEN, 0);
    out.extend_from_slice(&(mesh.faces.len() as u32).to_le_bytes());
    fn push(out: &mut Vec<u8>, v: Vec3) {
        out.extend_from_slice(&(v.x as f32).to_le_bytes());
        out.extend_from_slice(&(v.y as f32).to_le_bytes());
        out.extend_from_slice(&(v.z as f32).to_le_bytes());
    }
    for tri in &mesh.faces {
        let [a, b, c] = tri.map(|v| mesh.vertices[v as usize]);
        let normal = (b - a).cross(c - a).normalized().unwrap_or(Vec3::ZERO);
        push(&mut out, normal);
        push(&mut out, a);
        push(&mut out, b);
        push(&mut out, c);
        out.extend_from_slice(&[0, 0]);
    }
    Ok(out)
}

pub fn write_stl(mesh: &TriangleMesh, path: impl AsRef<Path>) -> Result<(), StlError> {
    let path = path.as_ref();
    let bytes = stl_bytes(mesh)?;
    std::fs::write(path, bytes).map_err(|source| StlError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Parse binary STL bytes back into an indexed mesh. Vertices are merged by
/// exact f32 bit pattern, so a written-then-read mesh keeps its face count
/// and shared vertices.
pub fn read_stl_bytes(bytes: &[u8]) -> Result<TriangleMesh, StlError> {
    if bytes.len() < HEADER_LEN + 4 {
        return Err(StlError::Truncated {
            offset: bytes.len(),
            needed: HEADER_LEN + 4,
            found: bytes.len(),
        });
    }
    let declared = u32::from_le_bytes(bytes[HEADER_LEN..HEADER_LEN + 4].try_into().unwrap());
    let expected = HEADER_LEN + 4 + TRIANGLE_LEN * declared as usize;
    if bytes.len() != expected {
        return Err(StlError::CountMismatch {
            declared,
            expected,
            found: bytes.len(),
        });
    }

    let mut mesh = TriangleMesh { vertices: Vec::new(), faces: Vec::new() };
    let mut seen: HashMap<[u32; 3], u32> = HashMap::new();
    for t in 0..declared as usize {
        let tri = &bytes[HEADER_LEN + 4 + t * TRIANGLE_LEN..][..TRIANGLE_LEN];
        let mut face = [0u32; 3];
        for (corner, slot) in face.iter_mut().enumerate() {
            // Skip the 12-byte normal; corners start at byte 12.
            let at = 12 + corner * 12;
            let word = |k: usize| {
                u32::from_le_bytes(tri[at + 4 * k..at + 4 * (k + 1)].try_into().unwrap())
            };
            let key = [word(0), word(1), word(2)];
            *slot = *seen.entry(key).or_insert_with(|| {
                let index = mesh.vertices.len() as u32;
                mesh.vertices.push(Vec3::new(
                    f32::from_bits(key[0]) as f64,
                    f32::from_bits(key[1]) as f64,
                    f32::from_bits(key[2]) as f64,
                ));
                index
            });
        }
        mesh.faces.push(face);
    }
    Ok(mesh)
}

pub fn read_stl(path: impl AsRef<Path>) -> Result<TriangleMesh, StlError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| StlError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_stl_bytes(&bytes)
}
