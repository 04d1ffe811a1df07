//! Plane splitting with triangle subdivision.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math::Vec3;
use crate::mesh::{MeshError, Plane, TriangleMesh};

/// Vertices within this signed distance (mm) of the plane are treated as
/// lying on it and belong to both sides of a split.
pub const ON_PLANE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, PartialEq)]
enum Side {
    Above,
    On,
    Below,
}

fn classify(d: f64) -> Side {
    if d > ON_PLANE_TOLERANCE {
        Side::Above
    } else if d < -ON_PLANE_TOLERANCE {
        Side::Below
    } else {
        Side::On
    }
}

/// One output side of a split under construction.
struct SideBuilder {
    mesh: TriangleMesh,
    /// Original vertex index -> index in this side's vertex list.
    remap: Vec<u32>,
    /// Cut point on original edge (lo, hi) -> index in this side's list.
    cut_points: BTreeMap<(u32, u32), u32>,
}

const UNMAPPED: u32 = u32::MAX;

impl SideBuilder {
    fn new(vertex_count: usize) -> Self {
        SideBuilder {
            mesh: TriangleMesh::default(),
            remap: alloc::vec![UNMAPPED; vertex_count],
            cut_points: BTreeMap::new(),
        }
    }

    fn carry(&mut self, original: u32, position: Vec3) -> u32 {
        let slot = &mut self.remap[original as usize];
        if *slot == UNMAPPED {
            *slot = self.mesh.vertices.len() as u32;
            self.mesh.vertices.push(position);
        }
        *slot
    }

    fn cut(&mut self, edge: (u32, u32), position: Vec3) -> u32 {
        if let Some(&idx) = self.cut_points.get(&edge) {
            return idx;
        }
        let idx = self.mesh.vertices.len() as u32;
        self.mesh.vertices.push(position);
        self.cut_points.insert(edge, idx);
        idx
    }

    fn polygon(&mut self, poly: &[u32]) {
        // Fan triangulation preserving winding; callers pass 3 or 4 vertices.
        for i in 1..poly.len() - 1 {
            self.mesh.faces.push([poly[0], poly[i], poly[i + 1]]);
        }
    }
}

/// Intersection of edge (a, b) with the plane, computed on a canonical vertex
/// ordering so adjacent faces get bit-identical cut points, then snapped onto
/// the plane.
fn edge_cut_point(
    mesh: &TriangleMesh,
    plane: &Plane,
    distances: &[f64],
    a: u32,
    b: u32,
) -> ((u32, u32), Vec3) {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    let (dl, dh) = (distances[lo as usize], distances[hi as usize]);
    let t = dl / (dl - dh);
    let p = mesh.vertices[lo as usize] + (mesh.vertices[hi as usize] - mesh.vertices[lo as usize]) * t;
    ((lo, hi), plane.project(p))
}

impl TriangleMesh {
    /// Split into the (above, below) sides of `plane`.
    ///
    /// Triangles crossing the plane are subdivided; the cut vertices are
    /// created exactly on the plane and shared between adjacent faces, so
    /// total surface area is conserved. Vertices within
    /// [`ON_PLANE_TOLERANCE`] of the plane belong to both sides; faces lying
    /// entirely in the plane are assigned to the above side.
    pub fn split_by_plane(&self, plane: &Plane) -> Result<(TriangleMesh, TriangleMesh), MeshError> {
        self.check_indices()?;
        let distances: Vec<f64> =
            self.vertices.iter().map(|&v| plane.signed_distance(v)).collect();
        let sides: Vec<Side> = distances.iter().map(|&d| classify(d)).collect();

        let mut above = SideBuilder::new(self.vertices.len());
        let mut below = SideBuilder::new(self.vertices.len());

        for &face in &self.faces {
            let cls = [
                sides[face[0] as usize],
                sides[face[1] as usize],
                sides[face[2] as usize],
            ];
            let any_above = cls.iter().any(|&s| s == Side::Above);
            let any_below = cls.iter().any(|&s| s == Side::Below);

            if !any_below {
                // Entirely above or on the plane (includes fully coplanar faces).
                let tri: Vec<u32> = face
                    .iter()
                    .map(|&v| above.carry(v, self.vertices[v as usize]))
                    .collect();
                above.polygon(&tri);
                continue;
            }
            if !any_above {
                let tri: Vec<u32> = face
                    .iter()
                    .map(|&v| below.carry(v, self.vertices[v as usize]))
                    .collect();
                below.polygon(&tri);
                continue;
            }

            // Crossing face: clip against the plane once per output side,
            // keeping on-plane vertices in both polygons.
            let mut above_poly: Vec<u32> = Vec::with_capacity(4);
            let mut below_poly: Vec<u32> = Vec::with_capacity(4);
            for e in 0..3 {
                let a = face[e];
                let b = face[(e + 1) % 3];
                let (ca, cb) = (sides[a as usize], sides[b as usize]);

                match ca {
                    Side::Above => above_poly.push(above.carry(a, self.vertices[a as usize])),
                    Side::Below => below_poly.push(below.carry(a, self.vertices[a as usize])),
                    Side::On => {
                        above_poly.push(above.carry(a, self.vertices[a as usize]));
                        below_poly.push(below.carry(a, self.vertices[a as usize]));
                    }
                }
                // A strict above/below crossing introduces a cut vertex on
                // both polygons.
                if (ca == Side::Above && cb == Side::Below)
                    || (ca == Side::Below && cb == Side::Above)
                {
                    let (key, p) = edge_cut_point(self, plane, &distances, a, b);
                    above_poly.push(above.cut(key, p));
                    below_poly.push(below.cut(key, p));
                }
            }
            if above_poly.len() >= 3 {
                above.polygon(&above_poly);
            }
            if below_poly.len() >= 3 {
                below.polygon(&below_poly);
            }
        }

        Ok((above.mesh, below.mesh))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cuboid;
    use alloc::vec;

    fn xy_plane() -> Plane {
        Plane::new(Vec3::new(0.0, 0.0, 1.0), 0.0).unwrap()
    }

    #[test]
    fn single_crossing_triangle_becomes_one_plus_two() {
        // One vertex above z=0, two below: above gets the apex triangle,
        // below gets a quad split into two triangles.
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 2.0),
                Vec3::new(-1.0, 0.0, -1.0),
                Vec3::new(1.0, 0.0, -1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let (above, below) = mesh.split_by_plane(&xy_plane()).unwrap();
        assert_eq!(above.face_count(), 1);
        assert_eq!(below.face_count(), 2);

        let total = mesh.surface_area();
        let sum = above.surface_area() + below.surface_area();
        assert!((sum - total).abs() / total < 1e-12);

        // Cut vertices land exactly on the plane.
        for v in above.vertices.iter().chain(&below.vertices) {
            if v.z.abs() < 0.5 {
                assert!(v.z.abs() <= 1e-12, "cut vertex off plane: {:?}", v);
            }
        }
    }

    #[test]
    fn on_plane_vertex_goes_to_both_sides() {
        let mesh = TriangleMesh::new(
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(1.0, 0.0, 1.0),
                Vec3::new(-1.0, 0.0, -1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let (above, below) = mesh.split_by_plane(&xy_plane()).unwrap();
        // Apex-on-plane crossing splits into one triangle per side.
        assert_eq!(above.face_count(), 1);
        assert_eq!(below.face_count(), 1);
        assert!(above.vertices.iter().any(|v| v.z == 0.0 && v.x == 0.0));
        assert!(below.vertices.iter().any(|v| v.z == 0.0 && v.x == 0.0));
    }

    #[test]
    fn plane_missing_the_mesh_leaves_one_side_empty() {
        let cube = cuboid(Vec3::ZERO, Vec3::new(1.0, 1.0, 1.0));
        let plane = Plane::new(Vec3::new(0.0, 0.0, 1.0), -5.0).unwrap();
        let (above, below) = cube.split_by_plane(&plane).unwrap();
        assert_eq!(above.face_count(), 12);
        assert_eq!(below.face_count(), 0);
        assert!((above.signed_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cube_split_conserves_area_and_shares_cut_vertices() {
        let cube = cuboid(Vec3::new(-1.0, -1.0, -1.0), Vec3::new(1.0, 1.0, 1.0));
        // Tilted plane so every kind of crossing shows up.
        let plane = Plane::new(Vec3::new(0.3, -0.2, 1.0), 0.1).unwrap();
        let (above, below) = cube.split_by_plane(&plane).unwrap();

        let total = cube.surface_area();
        let sum = above.surface_area() + below.surface_area();
        assert!((sum - total).abs() / total < 1e-9);

        for (side, sign) in [(&above, 1.0), (&below, -1.0)] {
            for &v in &side.vertices {
                let d = plane.signed_distance(v) * sign;
                assert!(d >= -1e-9, "vertex {:?} on wrong side ({})", v, d);
            }
        }
    }
}
