//! Parametric building blocks for mold shells and scaffolding parts.

use alloc::vec::Vec;

use crate::math::Vec3;
use crate::mesh::TriangleMesh;

#[allow(unused_imports)]
use num_traits::Float;

/// Open cylinder wall (no end caps) with outward normals, axis on z.
///
/// The two rings are boundary loops; callers cap or stitch them. Panics on
/// non-positive radius, empty height, or fewer than 3 segments.
pub fn open_tube(radius: f64, z0: f64, z1: f64, segments: u32) -> TriangleMesh {
    assert!(radius > 0.0 && z1 > z0 && segments >= 3, "invalid tube parameters");
    let n = segments as usize;
    let mut vertices = Vec::with_capacity(2 * n);
    for &z in &[z0, z1] {
        for i in 0..n {
            let theta = core::f64::consts::TAU * i as f64 / n as f64;
            vertices.push(Vec3::new(radius * theta.cos(), radius * theta.sin(), z));
        }
    }
    let mut faces = Vec::with_capacity(2 * n);
    for i in 0..n {
        let j = (i + 1) % n;
        let (a, b) = (i as u32, j as u32);
        let (c, d) = ((j + n) as u32, (i + n) as u32);
        faces.push([a, b, c]);
        faces.push([a, c, d]);
    }
    TriangleMesh { vertices, faces }
}

/// Axis-aligned solid box between `min` and `max`, outward winding.
pub fn cuboid(min: Vec3, max: Vec3) -> TriangleMesh {
    assert!(
        min.x < max.x && min.y < max.y && min.z < max.z,
        "cuboid needs min < max on every axis"
    );
    let vertices = alloc::vec![
        Vec3::new(min.x, min.y, min.z),
        Vec3::new(max.x, min.y, min.z),
        Vec3::new(max.x, max.y, min.z),
        Vec3::new(min.x, max.y, min.z),
        Vec3::new(min.x, min.y, max.z),
        Vec3::new(max.x, min.y, max.z),
        Vec3::new(max.x, max.y, max.z),
        Vec3::new(min.x, max.y, max.z),
    ];
    let faces = alloc::vec![
        [0, 3, 2],
        [0, 2, 1], // bottom, -z
        [4, 5, 6],
        [4, 6, 7], // top, +z
        [0, 1, 5],
        [0, 5, 4], // -y
        [1, 2, 6],
        [1, 6, 5], // +x
        [2, 3, 7],
        [2, 7, 6], // +y
        [3, 0, 4],
        [3, 4, 7], // -x
    ];
    TriangleMesh { vertices, faces }
}

/// Corner offsets in counter-clockwise order (seen from +z).
fn corners(cx: f64, cy: f64, w: f64, d: f64) -> [(f64, f64); 4] {
    let (hw, hd) = (w / 2.0, d / 2.0);
    [
        (cx - hw, cy - hd),
        (cx + hw, cy - hd),
        (cx + hw, cy + hd),
        (cx - hw, cy + hd),
    ]
}

/// Rectangular slab with a rectangular through-hole, both centred on
/// (`cx`, `cy`). Watertight with outward normals; the hole walls face the
/// hole. Panics unless the hole fits strictly inside the outline.
pub fn slab_with_square_hole(
    cx: f64,
    cy: f64,
    outer_w: f64,
    outer_d: f64,
    inner_w: f64,
    inner_d: f64,
    z0: f64,
    z1: f64,
) -> TriangleMesh {
    assert!(
        inner_w > 0.0 && inner_d > 0.0 && inner_w < outer_w && inner_d < outer_d && z1 > z0,
        "hole must fit strictly inside the slab"
    );
    let mut vertices = Vec::with_capacity(16);
    for &z in &[z0, z1] {
        for &(x, y) in &corners(cx, cy, outer_w, outer_d) {
            vertices.push(Vec3::new(x, y, z));
        }
        for &(x, y) in &corners(cx, cy, inner_w, inner_d) {
            vertices.push(Vec3::new(x, y, z));
        }
    }
    // Index helpers: outer bottom 0..4, inner bottom 4..8, outer top 8..12,
    // inner top 12..16.
    let ob = |i: usize| (i % 4) as u32;
    let ib = |i: usize| (4 + i % 4) as u32;
    let ot = |i: usize| (8 + i % 4) as u32;
    let it = |i: usize| (12 + i % 4) as u32;

    let mut faces = Vec::with_capacity(32);
    for i in 0..4 {
        let j = i + 1;
        // Outer wall, outward.
        faces.push([ob(i), ob(j), ot(j)]);
        faces.push([ob(i), ot(j), ot(i)]);
        // Hole wall, facing the hole.
        faces.push([ib(i), it(j), ib(j)]);
        faces.push([ib(i), it(i), it(j)]);
        // Top ring, +z.
        faces.push([ot(i), ot(j), it(j)]);
        faces.push([ot(i), it(j), it(i)]);
        // Bottom ring, -z.
        faces.push([ob(j), ob(i), ib(i)]);
        faces.push([ob(j), ib(i), ib(j)]);
    }
    TriangleMesh { vertices, faces }
}

/// Rectangular slab with a circular through-hole, centred on (`cx`, `cy`).
///
/// The annular top and bottom rings are produced by the same zipper stitch
/// used elsewhere for end caps, so the result is watertight with outward
/// normals. Panics unless the hole fits strictly inside the outline.
pub fn slab_with_circular_hole(
    cx: f64,
    cy: f64,
    outer_w: f64,
    outer_d: f64,
    hole_radius: f64,
    segments: u32,
    z0: f64,
    z1: f64,
) -> TriangleMesh {
    assert!(
        hole_radius > 0.0
            && 2.0 * hole_radius < outer_w
            && 2.0 * hole_radius < outer_d
            && z1 > z0
            && segments >= 3,
        "hole must fit strictly inside the slab"
    );
    // Outer walls only (no top/bottom yet): a square "tube".
    let mut mesh = TriangleMesh::default();
    for &z in &[z0, z1] {
        for &(x, y) in &corners(cx, cy, outer_w, outer_d) {
            mesh.vertices.push(Vec3::new(x, y, z));
        }
    }
    for i in 0..4u32 {
        let j = (i + 1) % 4;
        mesh.faces.push([i, j, j + 4]);
        mesh.faces.push([i, j + 4, i + 4]);
    }
    // Hole wall: a tube with reversed winding so it faces the hole.
    let tube = open_tube(hole_radius, z0, z1, segments).inverted();
    let tube = TriangleMesh {
        vertices: tube
            .vertices
            .iter()
            .map(|&v| Vec3::new(v.x + cx, v.y + cy, v.z))
            .collect(),
        faces: tube.faces,
    };
    mesh.append(&tube);

    // Four boundary loops remain: outer/inner at each z. Stitch same-z pairs
    // into the annular rings.
    let loops = mesh.boundary_loops().expect("open slab shell is manifold");
    assert_eq!(loops.len(), 4);
    let keys: alloc::vec::Vec<(f64, f64)> = loops
        .iter()
        .map(|ring| {
            let v = mesh.vertices[ring.vertices[0] as usize];
            (v.z, ((v.x - cx).powi(2) + (v.y - cy).powi(2)).sqrt())
        })
        .collect();
    for &z in &[z0, z1] {
        let find = |outer: bool| {
            keys.iter()
                .position(|&(lz, lr)| {
                    (lz - z).abs() < 1e-9 && (lr > hole_radius + 1e-9) == outer
                })
                .expect("annulus ring")
        };
        let (outer, inner) = (find(true), find(false));
        mesh.stitch_loops(&loops[outer], &loops[inner]).expect("ring stitch");
    }
    mesh
}
