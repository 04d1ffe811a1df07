//! Indexed triangle meshes and the operations the target pipeline needs:
//! winding-aware normals, face inversion, plane splitting, boundary-loop
//! extraction, zipper stitching, cap filling, and validation.

mod boundary;
mod primitives;
mod split;
mod validate;

pub use boundary::BoundaryLoop;
pub use primitives::{cuboid, open_tube, slab_with_circular_hole, slab_with_square_hole};
pub use validate::ValidationReport;

use alloc::vec::Vec;
use thiserror::Error;

#[allow(unused_imports)]
use num_traits::Float;

use crate::math::{Aabb, Affine, Vec3};

/// Triangle faces with an area below this (mm^2) count as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MeshError {
    #[error("face {face} references vertex {vertex} but the mesh has {vertex_count} vertices")]
    FaceIndexOutOfRange { face: usize, vertex: u32, vertex_count: usize },
    #[error("face {face} has (near-)zero area, its normal is undefined")]
    DegenerateFace { face: usize },
    #[error("face index {face} out of range ({face_count} faces)")]
    NoSuchFace { face: usize, face_count: usize },
    #[error("edge ({a}, {b}) is shared by {count} faces; mesh is not edge-manifold")]
    NonManifoldEdge { a: u32, b: u32, count: usize },
    #[error("boundary chain starting at vertex {start} does not close into a loop")]
    OpenBoundaryChain { start: u32 },
    #[error("boundary loop needs at least 3 vertices, got {found}")]
    LoopTooShort { found: usize },
    #[error("loops share vertex {vertex}; stitching would pinch the surface")]
    LoopsShareVertex { vertex: u32 },
    #[error("loop vertex {vertex} lies {deviation} mm off the fitted plane; cannot fill")]
    LoopNotPlanar { vertex: u32, deviation: f64 },
    #[error("boundary loop is degenerate; no plane fits it")]
    DegenerateLoop,
    #[error("transform is singular (det = {det:e}); it would collapse the mesh")]
    SingularTransform { det: f64 },
    #[error("plane normal must be non-zero")]
    ZeroPlaneNormal,
}

/// Oriented plane `normal . p = offset` with a unit normal.
///
/// Signed distance is positive on the side the normal points to.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plane {
    normal: Vec3,
    offset: f64,
}

impl Plane {
    pub fn new(normal: Vec3, offset: f64) -> Result<Self, MeshError> {
        let unit = normal.normalized().ok_or(MeshError::ZeroPlaneNormal)?;
        // Rescale the offset by the same factor so `normal . p = offset` keeps
        // describing the same point set after normalisation.
        Ok(Plane { normal: unit, offset: offset / normal.length() })
    }

    pub fn from_point_normal(point: Vec3, normal: Vec3) -> Result<Self, MeshError> {
        let unit = normal.normalized().ok_or(MeshError::ZeroPlaneNormal)?;
        Ok(Plane { normal: unit, offset: unit.dot(point) })
    }

    pub fn normal(&self) -> Vec3 {
        self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn signed_distance(&self, p: Vec3) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Orthogonal projection of `p` onto the plane.
    pub fn project(&self, p: Vec3) -> Vec3 {
        p - self.normal * self.signed_distance(p)
    }
}

/// An indexed triangle mesh. Vertices are in millimetres.
///
/// Face winding carries orientation: the normal of `[i, j, k]` points along
/// `(v_j - v_i) x (v_k - v_j)`. A closed mesh whose faces consistently wind
/// counter-clockwise seen from outside has positive [`signed_volume`].
///
/// [`signed_volume`]: TriangleMesh::signed_volume
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let mesh = TriangleMesh { vertices, faces };
        mesh.check_indices()?;
        Ok(mesh)
    }

    /// Verify every face index points at an existing vertex.
    pub fn check_indices(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        for (fi, face) in self.faces.iter().enumerate() {
            for &v in face {
                if v as usize >= n {
                    return Err(MeshError::FaceIndexOutOfRange {
                        face: fi,
                        vertex: v,
                        vertex_count: n,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    fn face_points(&self, face: [u32; 3]) -> [Vec3; 3] {
        [
            self.vertices[face[0] as usize],
            self.vertices[face[1] as usize],
            self.vertices[face[2] as usize],
        ]
    }

    /// Unnormalised face normal `(v_j - v_i) x (v_k - v_j)`; its length is
    /// twice the face area.
    pub fn face_cross(&self, face: usize) -> Result<Vec3, MeshError> {
        let f = *self
            .faces
            .get(face)
            .ok_or(MeshError::NoSuchFace { face, face_count: self.faces.len() })?;
        self.check_face_indices(face, f)?;
        let [a, b, c] = self.face_points(f);
        Ok((b - a).cross(c - b))
    }

    fn check_face_indices(&self, fi: usize, face: [u32; 3]) -> Result<(), MeshError> {
        for &v in &face {
            if v as usize >= self.vertices.len() {
                return Err(MeshError::FaceIndexOutOfRange {
                    face: fi,
                    vertex: v,
                    vertex_count: self.vertices.len(),
                });
            }
        }
        Ok(())
    }

    /// Unit normal of one face; errors if the face is degenerate.
    pub fn face_normal(&self, face: usize) -> Result<Vec3, MeshError> {
        self.face_cross(face)?
            .normalized()
            .ok_or(MeshError::DegenerateFace { face })
    }

    pub fn face_area(&self, face: usize) -> Result<f64, MeshError> {
        Ok(self.face_cross(face)?.length() * 0.5)
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len())
            .map(|f| self.face_cross(f).map(|c| c.length() * 0.5).unwrap_or(0.0))
            .sum()
    }

    /// Signed volume by the divergence theorem, `sum det(a, b, c) / 6`.
    /// Positive for consistently outward-wound closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&f| {
                let [a, b, c] = self.face_points(f);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    pub fn bounds(&self) -> Aabb {
        let mut b = Aabb::empty();
        for &v in &self.vertices {
            b.include(v);
        }
        b
    }

    /// Same surface with every face `[i, j, k]` rewritten as `[k, j, i]`,
    /// which negates every face normal.
    pub fn inverted(&self) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.clone(),
            faces: self.faces.iter().map(|&[i, j, k]| [k, j, i]).collect(),
        }
    }

    /// Area-weighted vertex normals. Vertices without any non-degenerate
    /// incident face get a zero vector.
    pub fn vertex_normals(&self) -> Result<Vec<Vec3>, MeshError> {
        self.check_indices()?;
        let mut acc = alloc::vec![Vec3::ZERO; self.vertices.len()];
        for f in 0..self.faces.len() {
            let cross = self.face_cross(f)?;
            for &v in &self.faces[f] {
                acc[v as usize] += cross;
            }
        }
        Ok(acc
            .into_iter()
            .map(|n| n.normalized().unwrap_or(Vec3::ZERO))
            .collect())
    }

    /// Apply an affine map. Orientation-reversing maps (negative determinant)
    /// re-invert the faces so outward stays outward; singular maps error.
    pub fn transformed(&self, map: &Affine) -> Result<TriangleMesh, MeshError> {
        let det = map.determinant();
        if det.abs() < 1e-12 {
            return Err(MeshError::SingularTransform { det });
        }
        let vertices: Vec<Vec3> = self.vertices.iter().map(|&v| map.apply(v)).collect();
        let faces = if det < 0.0 {
            self.faces.iter().map(|&[i, j, k]| [k, j, i]).collect()
        } else {
            self.faces.clone()
        };
        Ok(TriangleMesh { vertices, faces })
    }

    pub fn translated(&self, t: Vec3) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|&v| v + t).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Append another mesh as an independent component (indices offset).
    pub fn append(&mut self, other: &TriangleMesh) {
        let offset = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|&[i, j, k]| [i + offset, j + offset, k + offset]));
    }
}
