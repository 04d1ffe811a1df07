//! Mesh soundness checks: watertightness, manifoldness, orientation,
//! signed volume, bounds, and degeneracy counts.

use alloc::collections::BTreeMap;
use core::fmt;

use crate::math::Aabb;
use crate::mesh::{TriangleMesh, DEGENERATE_AREA};

/// Summary of the structural checks on one mesh.
///
/// `watertight` means every edge is shared by exactly two faces;
/// `consistently_oriented` additionally means the two faces traverse the
/// edge in opposite directions. A printable mold part should satisfy
/// [`ValidationReport::is_sound`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub face_count: usize,
    pub degenerate_faces: usize,
    pub unreferenced_vertices: usize,
    pub boundary_edges: usize,
    /// `None` when the boundary cannot be chained into loops (non-manifold
    /// or inconsistently oriented meshes).
    pub boundary_loop_count: Option<usize>,
    pub non_manifold_edges: usize,
    /// Interior edges whose two faces traverse them in the same direction.
    pub inconsistent_edges: usize,
    pub watertight: bool,
    pub edge_manifold: bool,
    pub consistently_oriented: bool,
    pub signed_volume_mm3: f64,
    pub surface_area_mm2: f64,
    pub bounds: Aabb,
}

impl ValidationReport {
    /// True when the mesh bounds a printable solid: closed, consistently
    /// outward-oriented, no degenerate faces, positive volume.
    pub fn is_sound(&self) -> bool {
        self.watertight
            && self.consistently_oriented
            && self.degenerate_faces == 0
            && self.signed_volume_mm3 > 0.0
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices:           {}", self.vertex_count)?;
        writeln!(f, "faces:              {}", self.face_count)?;
        writeln!(f, "degenerate faces:   {}", self.degenerate_faces)?;
        writeln!(f, "unused vertices:    {}", self.unreferenced_vertices)?;
        match self.boundary_loop_count {
            Some(loops) => writeln!(
                f,
                "boundary edges:     {} (loops: {})",
                self.boundary_edges, loops
            )?,
            None => writeln!(
                f,
                "boundary edges:     {} (loops: not chainable)",
                self.boundary_edges
            )?,
        }
        writeln!(f, "non-manifold edges: {}", self.non_manifold_edges)?;
        writeln!(
            f,
            "orientation:        {}",
            if self.consistently_oriented { "consistent" } else { "INCONSISTENT" }
        )?;
        writeln!(f, "watertight:         {}", if self.watertight { "yes" } else { "NO" })?;
        writeln!(f, "signed volume:      {:.3} mm^3", self.signed_volume_mm3)?;
        writeln!(f, "surface area:       {:.3} mm^2", self.surface_area_mm2)?;
        let e = self.bounds.extent();
        if e == crate::math::Vec3::ZERO && self.vertex_count == 0 {
            writeln!(f, "bounds:             (empty)")
        } else {
            writeln!(
                f,
                "bounds:             [{:.3}, {:.3}, {:.3}] .. [{:.3}, {:.3}, {:.3}] mm",
                self.bounds.min.x,
                self.bounds.min.y,
                self.bounds.min.z,
                self.bounds.max.x,
                self.bounds.max.y,
                self.bounds.max.z
            )
        }
    }
}

impl TriangleMesh {
    /// Run every structural check. Never fails; callers decide which report
    /// fields are fatal for their use case.
    pub fn validate(&self) -> ValidationReport {
        let index_ok = self.check_indices().is_ok();

        let mut degenerate = 0usize;
        let mut referenced = alloc::vec![false; self.vertices.len()];
        // Undirected edge -> (total uses, uses in canonical (lo -> hi) direction).
        let mut edges: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
        if index_ok {
            for (fi, face) in self.faces.iter().enumerate() {
                for &v in face {
                    referenced[v as usize] = true;
                }
                let repeated =
                    face[0] == face[1] || face[1] == face[2] || face[0] == face[2];
                let area = self.face_area(fi).unwrap_or(0.0);
                if repeated || area <= DEGENERATE_AREA {
                    degenerate += 1;
                }
                for e in 0..3 {
                    let a = face[e];
                    let b = face[(e + 1) % 3];
                    let key = if a < b { (a, b) } else { (b, a) };
                    let entry = edges.entry(key).or_insert((0, 0));
                    entry.0 += 1;
                    if a < b {
                        entry.1 += 1;
                    }
                }
            }
        }

        let mut boundary = 0usize;
        let mut non_manifold = 0usize;
        let mut inconsistent = 0usize;
        for &(count, forward) in edges.values() {
            match count {
                1 => boundary += 1,
                2 => {
                    // Two opposite traversals show up as one forward and one
                    // backward use of the canonical direction.
                    if forward != 1 {
                        inconsistent += 1;
                    }
                }
                _ => non_manifold += 1,
            }
        }

        let edge_manifold = index_ok && non_manifold == 0;
        let watertight = edge_manifold && boundary == 0;
        let boundary_loop_count = if edge_manifold {
            self.boundary_loops().ok().map(|l| l.len())
        } else {
            None
        };

        ValidationReport {
            vertex_count: self.vertices.len(),
            face_count: self.faces.len(),
            degenerate_faces: degenerate,
            unreferenced_vertices: referenced.iter().filter(|&&r| !r).count(),
            boundary_edges: boundary,
            boundary_loop_count,
            non_manifold_edges: non_manifold,
            inconsistent_edges: inconsistent,
            watertight,
            edge_manifold,
            consistently_oriented: index_ok && inconsistent == 0 && non_manifold == 0,
            signed_volume_mm3: if index_ok { self.signed_volume() } else { 0.0 },
            surface_area_mm2: if index_ok { self.surface_area() } else { 0.0 },
            bounds: self.bounds(),
        }
    }
}
