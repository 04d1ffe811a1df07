//! Boundary-loop extraction and the operations that close boundaries:
//! zipper stitching between two loops, triangle-fan caps, and planar fills.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::math::Vec3;
use crate::mesh::{MeshError, Plane, TriangleMesh};

#[allow(unused_imports)]
use num_traits::Float;

/// Loop vertices must sit within this distance (mm) of their common plane
/// for [`TriangleMesh::fill_planar_loop`] to accept them.
pub const PLANAR_FILL_TOLERANCE: f64 = 1e-6;

/// An ordered ring of vertex indices on an open edge of a mesh.
///
/// The order follows the winding of the faces that own the boundary edges,
/// i.e. edge `vertices[k] -> vertices[k+1]` appears in exactly one face in
/// exactly that direction. The ring is implicitly closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLoop {
    pub vertices: Vec<u32>,
}

impl BoundaryLoop {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

impl TriangleMesh {
    /// All boundary loops, each normalised to start at its smallest vertex
    /// index and sorted by that index. Errors if any edge is used by more
    /// than two faces.
    pub fn boundary_loops(&self) -> Result<Vec<BoundaryLoop>, MeshError> {
        self.check_indices()?;

        // Undirected edge -> (use count, directed form from its owning face).
        let mut edges: BTreeMap<(u32, u32), (usize, (u32, u32))> = BTreeMap::new();
        for face in &self.faces {
            for e in 0..3 {
                let a = face[e];
                let b = face[(e + 1) % 3];
                let key = if a < b { (a, b) } else { (b, a) };
                let entry = edges.entry(key).or_insert((0, (a, b)));
                entry.0 += 1;
                entry.1 = (a, b);
            }
        }

        // Directed boundary half-edges, grouped by start vertex.
        let mut outgoing: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (&(a, b), &(count, (da, db))) in &edges {
            if count > 2 {
                return Err(MeshError::NonManifoldEdge { a, b, count });
            }
            if count == 1 {
                outgoing.entry(da).or_default().push(db);
            }
        }
        for ends in outgoing.values_mut() {
            ends.sort_unstable();
        }

        let mut loops = Vec::new();
        loop {
            // Deterministic start: smallest vertex that still has an unused
            // outgoing boundary edge.
            let start = match outgoing.keys().next() {
                Some(&s) => s,
                None => break,
            };
            let mut ring = alloc::vec![start];
            let mut cur = start;
            loop {
                let next = {
                    let ends = outgoing
                        .get_mut(&cur)
                        .ok_or(MeshError::OpenBoundaryChain { start: cur })?;
                    let next = ends.remove(0);
                    if ends.is_empty() {
                        outgoing.remove(&cur);
                    }
                    next
                };
                if next == start {
                    break;
                }
                ring.push(next);
                cur = next;
            }
            // Normalise: rotate the ring so it starts at its smallest index.
            let pivot = ring
                .iter()
                .enumerate()
                .min_by_key(|&(_, &v)| v)
                .map(|(i, _)| i)
                .unwrap_or(0);
            ring.rotate_left(pivot);
            loops.push(BoundaryLoop { vertices: ring });
        }
        loops.sort_by_key(|l| l.vertices[0]);
        Ok(loops)
    }

    /// Connect two boundary loops of this mesh with a band of triangles
    /// (a greedy zipper), returning the number of faces added.
    ///
    /// Loop `a` is walked forward and loop `b` backward, which keeps the band
    /// consistent with the winding both loops inherited from their owning
    /// faces. At every step the side whose advance creates the shorter new
    /// chord moves (ties go to the lower vertex index); advancing one side
    /// per face keeps the band at exactly `a.len() + b.len()` triangles and,
    /// unlike an edge-length greedy, never fans one loop out completely
    /// before starting the other.
    ///
    /// The loops must not share vertices.
    pub fn stitch_loops(
        &mut self,
        a: &BoundaryLoop,
        b: &BoundaryLoop,
    ) -> Result<usize, MeshError> {
        if a.len() < 3 {
            return Err(MeshError::LoopTooShort { found: a.len() });
        }
        if b.len() < 3 {
            return Err(MeshError::LoopTooShort { found: b.len() });
        }
        let a_set: BTreeSet<u32> = a.vertices.iter().copied().collect();
        if let Some(&shared) = b.vertices.iter().find(|v| a_set.contains(v)) {
            return Err(MeshError::LoopsShareVertex { vertex: shared });
        }
        for &v in a.vertices.iter().chain(&b.vertices) {
            if v as usize >= self.vertices.len() {
                return Err(MeshError::FaceIndexOutOfRange {
                    face: self.faces.len(),
                    vertex: v,
                    vertex_count: self.vertices.len(),
                });
            }
        }

        let n = a.len();
        let m = b.len();
        let pos = |v: u32| self.vertices[v as usize];

        // Anchor the zipper at the b vertex nearest to a's start.
        let a_start = a.vertices[0];
        let mut jb = 0usize;
        let mut best = f64::INFINITY;
        for (j, &bv) in b.vertices.iter().enumerate() {
            let d = pos(bv).distance(pos(a_start));
            if d < best || (d == best && bv < b.vertices[jb]) {
                best = d;
                jb = j;
            }
        }

        let mut ia = 0usize;
        let mut ea = 0usize; // edges of a consumed
        let mut eb = 0usize; // edges of b consumed
        let mut added = 0usize;
        while ea < n || eb < m {
            let a_cur = a.vertices[ia % n];
            let b_cur = b.vertices[jb % m];
            // b is walked backward, so its "next" vertex is the predecessor.
            let a_next = a.vertices[(ia + 1) % n];
            let b_next = b.vertices[(jb + m - 1) % m];

            let advance_a = if ea < n && eb < m {
                let da = pos(a_next).distance(pos(b_cur));
                let db = pos(b_next).distance(pos(a_cur));
                if da < db {
                    true
                } else if db < da {
                    false
                } else {
                    a_next < b_next
                }
            } else {
                ea < n
            };

            if advance_a {
                self.faces.push([a_next, a_cur, b_cur]);
                ia += 1;
                ea += 1;
            } else {
                self.faces.push([a_cur, b_cur, b_next]);
                jb = (jb + m - 1) % m;
                eb += 1;
            }
            added += 1;
        }
        Ok(added)
    }

    /// Close a boundary loop with a fan around its centroid, returning the
    /// number of faces added (one per loop edge). The new vertex is appended.
    pub fn fan_cap(&mut self, ring: &BoundaryLoop) -> Result<usize, MeshError> {
        if ring.len() < 3 {
            return Err(MeshError::LoopTooShort { found: ring.len() });
        }
        let mut centroid = Vec3::ZERO;
        for &v in &ring.vertices {
            let p = self
                .vertices
                .get(v as usize)
                .ok_or(MeshError::FaceIndexOutOfRange {
                    face: self.faces.len(),
                    vertex: v,
                    vertex_count: self.vertices.len(),
                })?;
            centroid += *p;
        }
        centroid = centroid / ring.len() as f64;

        let c = self.vertices.len() as u32;
        self.vertices.push(centroid);
        let n = ring.len();
        for k in 0..n {
            let v0 = ring.vertices[k];
            let v1 = ring.vertices[(k + 1) % n];
            // Cap faces traverse each boundary edge opposite to its owner.
            self.faces.push([c, v1, v0]);
        }
        Ok(n)
    }

    /// Extrude a boundary loop by a fixed offset: every loop vertex is
    /// copied, shifted, and joined to the original with a quad band.
    /// Returns the new boundary loop (the shifted copy, same winding), ready
    /// for further stitching or capping.
    pub fn extrude_loop(
        &mut self,
        ring: &BoundaryLoop,
        offset: Vec3,
    ) -> Result<BoundaryLoop, MeshError> {
        if ring.len() < 3 {
            return Err(MeshError::LoopTooShort { found: ring.len() });
        }
        let base = self.vertices.len() as u32;
        for &v in &ring.vertices {
            let p = self
                .vertices
                .get(v as usize)
                .copied()
                .ok_or(MeshError::FaceIndexOutOfRange {
                    face: self.faces.len(),
                    vertex: v,
                    vertex_count: self.vertices.len(),
                })?;
            self.vertices.push(p + offset);
        }
        let n = ring.len();
        for i in 0..n {
            let a = ring.vertices[i];
            let b = ring.vertices[(i + 1) % n];
            let a_copy = base + i as u32;
            let b_copy = base + ((i + 1) % n) as u32;
            // Band faces traverse the old boundary edge opposite to its
            // owner and leave the copied ring wound the same way as the
            // original.
            self.faces.push([b, a, a_copy]);
            self.faces.push([b, a_copy, b_copy]);
        }
        Ok(BoundaryLoop {
            vertices: (base..base + n as u32).collect(),
        })
    }

    /// Close a planar boundary loop with an ear-clipping triangulation,
    /// returning the number of faces added (`len - 2`). No vertices are
    /// added; use this to flatten split cuts, which may be non-convex.
    pub fn fill_planar_loop(&mut self, ring: &BoundaryLoop) -> Result<usize, MeshError> {
        if ring.len() < 3 {
            return Err(MeshError::LoopTooShort { found: ring.len() });
        }
        let points: Vec<Vec3> = ring
            .vertices
            .iter()
            .map(|&v| {
                self.vertices
                    .get(v as usize)
                    .copied()
                    .ok_or(MeshError::FaceIndexOutOfRange {
                        face: self.faces.len(),
                        vertex: v,
                        vertex_count: self.vertices.len(),
                    })
            })
            .collect::<Result<_, _>>()?;

        // Newell's method gives a robust loop normal for near-planar rings.
        let mut normal = Vec3::ZERO;
        let mut centroid = Vec3::ZERO;
        for i in 0..points.len() {
            let p = points[i];
            let q = points[(i + 1) % points.len()];
            normal.x += (p.y - q.y) * (p.z + q.z);
            normal.y += (p.z - q.z) * (p.x + q.x);
            normal.z += (p.x - q.x) * (p.y + q.y);
            centroid += p;
        }
        centroid = centroid / points.len() as f64;
        let normal = normal.normalized().ok_or(MeshError::DegenerateLoop)?;
        let plane = Plane::from_point_normal(centroid, normal)?;
        for (k, &p) in points.iter().enumerate() {
            let d = plane.signed_distance(p).abs();
            if d > PLANAR_FILL_TOLERANCE {
                return Err(MeshError::LoopNotPlanar {
                    vertex: ring.vertices[k],
                    deviation: d,
                });
            }
        }

        // Project to 2D in an orthonormal in-plane basis.
        let seed = if normal.x.abs() < 0.9 {
            Vec3::new(1.0, 0.0, 0.0)
        } else {
            Vec3::new(0.0, 1.0, 0.0)
        };
        let u = seed.cross(normal).normalized().ok_or(MeshError::DegenerateLoop)?;
        let w = normal.cross(u);
        let flat: Vec<(f64, f64)> = points
            .iter()
            .map(|&p| ((p - centroid).dot(u), (p - centroid).dot(w)))
            .collect();

        let triangles = ear_clip(&flat).ok_or(MeshError::DegenerateLoop)?;
        let added = triangles.len();
        for (i, j, k) in triangles {
            // Reverse each ear so cap faces traverse the boundary edges
            // opposite to the faces that own them.
            self.faces
                .push([ring.vertices[k], ring.vertices[j], ring.vertices[i]]);
        }
        Ok(added)
    }
}

fn cross2(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Ear-clip a simple polygon given in order. Returns index triples in the
/// polygon's own orientation, or `None` for degenerate input.
fn ear_clip(poly: &[(f64, f64)]) -> Option<Vec<(usize, usize, usize)>> {
    let n = poly.len();
    if n < 3 {
        return None;
    }
    // Polygon orientation from the signed area; ears must agree with it.
    let mut doubled_area = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        doubled_area += p.0 * q.1 - q.0 * p.1;
    }
    if doubled_area == 0.0 {
        return None;
    }
    let orient = if doubled_area > 0.0 { 1.0 } else { -1.0 };
    const EPS_AREA: f64 = 1e-10;

    let mut idx: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        let mut best_fallback = (f64::NEG_INFINITY, 0usize);
        for k in 0..m {
            let (ip, ic, inx) = (idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]);
            let convexity = cross2(poly[ip], poly[ic], poly[inx]) * orient;
            if convexity > best_fallback.0 {
                best_fallback = (convexity, k);
            }
            if convexity <= EPS_AREA {
                continue;
            }
            // Reject the ear if any remaining vertex lies inside it (points
            // exactly on the ear's edges block it too, to keep slivers from
            // overlapping collinear chains).
            let mut blocked = false;
            for &other in &idx {
                if other == ip || other == ic || other == inx {
                    continue;
                }
                let p = poly[other];
                let d0 = cross2(poly[ip], poly[ic], p) * orient;
                let d1 = cross2(poly[ic], poly[inx], p) * orient;
                let d2 = cross2(poly[inx], poly[ip], p) * orient;
                if d0 >= -EPS_AREA && d1 >= -EPS_AREA && d2 >= -EPS_AREA {
                    blocked = true;
                    break;
                }
            }
            if blocked {
                continue;
            }
            out.push((ip, ic, inx));
            idx.remove(k);
            clipped = true;
            break;
        }
        if !clipped {
            // Numerical lock (collinear runs); clip the most convex corner
            // so the loop always terminates.
            let k = best_fallback.1;
            let m = idx.len();
            out.push((idx[(k + m - 1) % m], idx[k], idx[(k + 1) % m]));
            idx.remove(k);
        }
    }
    out.push((idx[0], idx[1], idx[2]));
    Some(out)
}
