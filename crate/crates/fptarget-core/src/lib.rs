//! Core kernels for building and checking 3D fingerprint targets.
//!
//! Everything in this crate operates on plain in-memory data: indexed triangle
//! meshes, 8-bit grayscale rasters, and score lists. File formats, process
//! spawning, and the command line live in the companion `fptarget` crate.
//!
//! Conventions used throughout:
//!
//! - All lengths are millimetres, all raster coordinates are pixels.
//! - Meshes are indexed triangle lists. Face winding is meaningful: the face
//!   normal of `[i, j, k]` is `(v_j - v_i) x (v_k - v_j)`, so consistently
//!   wound closed meshes have outward normals and positive signed volume.
//! - Finger surfaces are generated with the finger axis along +z and the open
//!   base ring in the z = 0 plane.
//!
//! The crate is `no_std` (with `alloc`); enable the `std` feature if callers
//! want `std::error::Error` conversions to pick up backtraces etc. (the error
//! types already implement `core::error::Error` unconditionally).

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod interop;
pub mod math;
pub mod mesh;
pub mod metrology;
pub mod mold;
pub mod pattern;
pub mod projection;
pub mod scaffold;

pub use math::{Aabb, Affine, Vec3};
pub use mesh::{BoundaryLoop, MeshError, Plane, TriangleMesh, ValidationReport};
