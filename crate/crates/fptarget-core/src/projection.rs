//! Smooth finger surface construction and 2D-to-3D ridge projection.
//!
//! The finger model is a half-capsule: a cylinder along +z closed by a
//! hemispherical tip, open at the base (z = 0). Images are unrolled onto it
//! by arc length and turned into an outward displacement field, dark pixels
//! rising by the full ridge height.

use alloc::string::String;
use alloc::vec::Vec;
use thiserror::Error;

use crate::math::Vec3;
use crate::mesh::TriangleMesh;
use crate::pattern::GrayscaleImage;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("finger dimensions must be positive, got diameter {diameter_mm} mm, length {length_mm} mm")]
    BadFingerDimensions { diameter_mm: f64, length_mm: f64 },
    #[error("tessellation too coarse: {circumferential}x{axial} segments, need at least 8x1")]
    TooFewSegments { circumferential: u32, axial: u32 },
    #[error(
        "image too small for the surface at this scale: need {required_w}x{required_h} px, \
         image is {actual_w}x{actual_h} px"
    )]
    ImageTooSmall { required_w: u32, required_h: u32, actual_w: u32, actual_h: u32 },
    #[error("ridge height must be in (0, 1] mm, got {ridge_height_mm}")]
    BadRidgeHeight { ridge_height_mm: f64 },
    #[error("projection scale must be positive and finite, got {px_per_mm} px/mm")]
    BadScale { px_per_mm: f64 },
    #[error("scale model invalid: {reason}")]
    BadScaleModel { reason: String },
}

/// Smooth parametric finger surface with per-vertex normals and (u, v)
/// coordinates.
///
/// u runs around the circumference (u = 0 at the +x meridian, increasing
/// toward +y), v runs along the meridian arc from the base (v = 0) to the
/// tip pole (v = 1). The mesh has exactly one boundary loop, the base ring.
#[derive(Clone, Debug)]
pub struct FingerSurface {
    pub mesh: TriangleMesh,
    pub uv: Vec<(f64, f64)>,
    pub normals: Vec<Vec3>,
    pub radius_mm: f64,
    pub body_length_mm: f64,
}

impl FingerSurface {
    /// Total height from base plane to tip pole.
    pub fn height_mm(&self) -> f64 {
        self.body_length_mm + self.radius_mm
    }

    /// Arc length of one full turn around the body.
    pub fn circumference_mm(&self) -> f64 {
        core::f64::consts::TAU * self.radius_mm
    }

    /// Arc length of the meridian from base ring to tip pole.
    pub fn meridian_mm(&self) -> f64 {
        self.body_length_mm + core::f64::consts::FRAC_PI_2 * self.radius_mm
    }
}

/// Build the synthetic smooth finger: a cylinder of the given diameter and
/// body length closed by a hemispherical tip, open at the base.
///
/// The base ring lies in the z = 0 plane, the axis is +z. Normals are
/// analytic (exact radial/spherical directions), not averaged from faces.
pub fn make_smooth_finger(
    diameter_mm: f64,
    length_mm: f64,
    circumferential_segments: u32,
    axial_segments: u32,
) -> Result<FingerSurface, ProjectionError> {
    if !(diameter_mm.is_finite() && diameter_mm > 0.0 && length_mm.is_finite() && length_mm > 0.0)
    {
        return Err(ProjectionError::BadFingerDimensions {
            diameter_mm,
            length_mm,
        });
    }
    if circumferential_segments < 8 || axial_segments < 1 {
        return Err(ProjectionError::TooFewSegments {
            circumferential: circumferential_segments,
            axial: axial_segments,
        });
    }
    let r = diameter_mm / 2.0;
    let circ = circumferential_segments as usize;
    // Hemisphere rings at the same angular density as the circumference, so
    // the tip never becomes the coarsest part of the surface.
    let hemi = (circ / 4).max(2);
    let meridian = length_mm + core::f64::consts::FRAC_PI_2 * r;

    let mut vertices = Vec::new();
    let mut uv = Vec::new();
    let mut normals = Vec::new();

    // Body rings, base upward: z = length * k / axial.
    for k in 0..=axial_segments as usize {
        let z = length_mm * k as f64 / axial_segments as f64;
        let v = z / meridian;
        for i in 0..circ {
            let u = i as f64 / circ as f64;
            let theta = core::f64::consts::TAU * u;
            let (sin_t, cos_t) = theta.sin_cos();
            vertices.push(Vec3::new(r * cos_t, r * sin_t, z));
            uv.push((u, v));
            normals.push(Vec3::new(cos_t, sin_t, 0.0));
        }
    }

    // Hemisphere rings above the equator (the last body ring), pole last.
    // Polar angle phi measured up from the equator.
    for h in 1..hemi {
        let phi = core::f64::consts::FRAC_PI_2 * h as f64 / hemi as f64;
        let (sin_p, cos_p) = phi.sin_cos();
        let v = (length_mm + r * phi) / meridian;
        for i in 0..circ {
            let u = i as f64 / circ as f64;
            let theta = core::f64::consts::TAU * u;
            let (sin_t, cos_t) = theta.sin_cos();
            let n = Vec3::new(cos_p * cos_t, cos_p * sin_t, sin_p);
            vertices.push(Vec3::new(r * n.x, r * n.y, length_mm + r * n.z));
            uv.push((u, v));
            normals.push(n);
        }
    }
    let pole = vertices.len() as u32;
    vertices.push(Vec3::new(0.0, 0.0, length_mm + r));
    uv.push((0.0, 1.0));
    normals.push(Vec3::new(0.0, 0.0, 1.0));

    // Quad strips between consecutive rings, wound outward.
    let rings = axial_segments as usize + hemi;
    let mut faces = Vec::new();
    for ring in 0..rings - 1 {
        let lo = (ring * circ) as u32;
        let hi = lo + circ as u32;
        for i in 0..circ as u32 {
            let j = (i + 1) % circ as u32;
            faces.push([lo + i, lo + j, hi + j]);
            faces.push([lo + i, hi + j, hi + i]);
        }
    }
    // Tip fan from the last ring to the pole.
    let last = ((rings - 1) * circ) as u32;
    for i in 0..circ as u32 {
        let j = (i + 1) % circ as u32;
        faces.push([last + i, last + j, pole]);
    }

    let mesh = TriangleMesh::new(vertices, faces).expect("capsule indices are in range");
    Ok(FingerSurface {
        mesh,
        uv,
        normals,
        radius_mm: r,
        body_length_mm: length_mm,
    })
}

/// Projection scale and the accumulated fabrication shrink fractions.
///
/// Fractions are relative point-to-point distance losses: modeling, printing,
/// and casting. They accumulate additively, and the compensated scale divides
/// the nominal scale by the accumulated total.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleModel {
    pub nominal_px_per_mm: f64,
    pub e_model: f64,
    pub e_print: f64,
    pub e_cast: f64,
}

impl Default for ScaleModel {
    /// 500 ppi nominal scale with the measured modeling, printing, and
    /// casting losses.
    fn default() -> Self {
        ScaleModel {
            nominal_px_per_mm: 19.685,
            e_model: 0.058,
            e_print: 0.1142,
            e_cast: 0.018,
        }
    }
}

impl ScaleModel {
    pub fn validate(&self) -> Result<(), ProjectionError> {
        if !(self.nominal_px_per_mm.is_finite() && self.nominal_px_per_mm > 0.0) {
            return Err(ProjectionError::BadScaleModel {
                reason: alloc::format!("nominal scale {} px/mm not positive", self.nominal_px_per_mm),
            });
        }
        for (name, e) in [
            ("e_model", self.e_model),
            ("e_print", self.e_print),
            ("e_cast", self.e_cast),
        ] {
            if !(e.is_finite() && (0.0..0.5).contains(&e)) {
                return Err(ProjectionError::BadScaleModel {
                    reason: alloc::format!("{} = {} outside [0, 0.5)", name, e),
                });
            }
        }
        Ok(())
    }

    /// Accumulated shrink fraction (additive composition).
    pub fn total_error(&self, include_cast: bool) -> f64 {
        self.e_model + self.e_print + if include_cast { self.e_cast } else { 0.0 }
    }

    /// Scale to project at so the fabricated artifact realizes nominal
    /// dimensions: nominal / (1 + accumulated error).
    pub fn compensated_scale(&self, include_cast: bool) -> f64 {
        self.nominal_px_per_mm / (1.0 + self.total_error(include_cast))
    }

    /// Physical distance a pixel count corresponds to after full
    /// compensation: the cast artifact realizes nominal-scale geometry.
    pub fn expected_physical_distance(&self, pixels: f64) -> f64 {
        pixels / self.nominal_px_per_mm
    }
}

/// Which part of the circumference receives the image.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Wrap {
    /// Frontal 180 degrees (u in [0.25, 0.75]); the back half stays smooth.
    /// The print area of a finger pad, and the default.
    #[default]
    Frontal,
    /// Full 360-degree wrap.
    Full,
}

impl Wrap {
    /// Covered u range.
    fn u_span(self) -> (f64, f64) {
        match self {
            Wrap::Frontal => (0.25, 0.75),
            Wrap::Full => (0.0, 1.0),
        }
    }
}

/// Displace the surface outward by the image's ridge field.
///
/// The image is unrolled onto the wrapped arc by physical arc length times
/// `scale_px_per_mm`: pixel column 0 sits at the wrap start, row 0 at the
/// base ring. Each vertex moves along its analytic normal by
/// `ridge_height_mm * (1 - I/255)`, so dark pixels (ridges) rise by the full
/// height and white pixels not at all. Vertices outside the wrap are left
/// untouched. Topology is unchanged.
pub fn map_image_to_surface(
    image: &GrayscaleImage,
    surface: &FingerSurface,
    scale_px_per_mm: f64,
    ridge_height_mm: f64,
    wrap: Wrap,
) -> Result<TriangleMesh, ProjectionError> {
    if !(scale_px_per_mm.is_finite() && scale_px_per_mm > 0.0) {
        return Err(ProjectionError::BadScale { px_per_mm: scale_px_per_mm });
    }
    if !(ridge_height_mm.is_finite() && ridge_height_mm > 0.0 && ridge_height_mm <= 1.0) {
        return Err(ProjectionError::BadRidgeHeight { ridge_height_mm });
    }
    let (u_lo, u_hi) = wrap.u_span();
    let arc_w = (u_hi - u_lo) * surface.circumference_mm();
    let arc_h = surface.meridian_mm();
    let required_w = (arc_w * scale_px_per_mm).ceil() as u32;
    let required_h = (arc_h * scale_px_per_mm).ceil() as u32;
    if image.width() < required_w || image.height() < required_h {
        return Err(ProjectionError::ImageTooSmall {
            required_w,
            required_h,
            actual_w: image.width(),
            actual_h: image.height(),
        });
    }

    let mut mesh = surface.mesh.clone();
    for (idx, vertex) in mesh.vertices.iter_mut().enumerate() {
        let (u, v) = surface.uv[idx];
        if u < u_lo || u > u_hi {
            continue;
        }
        let px = (u - u_lo) * surface.circumference_mm() * scale_px_per_mm;
        let py = v * surface.meridian_mm() * scale_px_per_mm;
        let intensity = image.sample_bilinear(px, py);
        let d = ridge_height_mm * (1.0 - intensity / 255.0);
        *vertex = *vertex + surface.normals[idx] * d;
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::{sine_grating, GratingKind};
    use approx::assert_relative_eq;

    fn capsule() -> FingerSurface {
        make_smooth_finger(16.0, 30.0, 64, 64).unwrap()
    }

    #[test]
    fn capsule_bounding_box_is_diameter_by_height() {
        let s = capsule();
        let b = s.mesh.bounds();
        assert_relative_eq!(b.min.x, -8.0, epsilon = 1e-12);
        assert_relative_eq!(b.max.x, 8.0, epsilon = 1e-12);
        assert_relative_eq!(b.min.y, -8.0, epsilon = 1e-12);
        assert_relative_eq!(b.max.y, 8.0, epsilon = 1e-12);
        assert_relative_eq!(b.min.z, 0.0, epsilon = 1e-12);
        assert_relative_eq!(b.max.z, 38.0, epsilon = 1e-12);
        assert_relative_eq!(s.height_mm(), 38.0);
    }

    #[test]
    fn capsule_normals_are_unit_and_radial_on_the_body() {
        let s = capsule();
        for (i, n) in s.normals.iter().enumerate() {
            assert!((n.length() - 1.0).abs() < 1e-9, "normal {} not unit", i);
        }
        // Body vertices: normal is the radial direction, z component zero.
        for (i, v) in s.mesh.vertices.iter().enumerate() {
            if v.z < s.body_length_mm - 1e-9 {
                let n = s.normals[i];
                assert_eq!(n.z, 0.0);
                assert_relative_eq!(n.x * s.radius_mm, v.x, epsilon = 1e-12);
                assert_relative_eq!(n.y * s.radius_mm, v.y, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn capsule_has_exactly_one_boundary_loop_at_the_base() {
        let s = capsule();
        let loops = s.mesh.boundary_loops().unwrap();
        assert_eq!(loops.len(), 1);
        assert_eq!(loops[0].vertices.len(), 64);
        for &vi in &loops[0].vertices {
            assert_eq!(s.mesh.vertices[vi as usize].z, 0.0);
        }
    }

    #[test]
    fn capsule_volume_approaches_the_analytic_value() {
        // Cap the base and compare against pi r^2 L + (2/3) pi r^3.
        let s = make_smooth_finger(16.0, 30.0, 128, 64).unwrap();
        let mut mesh = s.mesh.clone();
        let loops = mesh.boundary_loops().unwrap();
        mesh.fan_cap(&loops[0]).unwrap();
        let report = mesh.validate();
        assert!(report.is_sound(), "capped capsule unsound: {:?}", report);
        let analytic = core::f64::consts::PI * 64.0 * 30.0
            + 2.0 / 3.0 * core::f64::consts::PI * 512.0;
        assert_relative_eq!(report.signed_volume_mm3, analytic, max_relative = 0.01);
    }

    #[test]
    fn compensated_scale_matches_published_pair() {
        let m = ScaleModel::default();
        m.validate().unwrap();
        assert!((m.compensated_scale(false) - 16.79).abs() < 0.005);
        assert_relative_eq!(m.total_error(false) * 100.0, 17.22, epsilon = 1e-9);
        // Including the cast stage shrinks the scale further.
        assert_relative_eq!(m.compensated_scale(true), 19.685 / 1.1902, epsilon = 1e-9);
        let zero = ScaleModel { e_model: 0.0, e_print: 0.0, e_cast: 0.0, ..m };
        assert_relative_eq!(zero.compensated_scale(true), 19.685, epsilon = 1e-12);
    }

    #[test]
    fn expected_distance_matches_published_value() {
        let m = ScaleModel::default();
        assert!((m.expected_physical_distance(10.0) - 0.508).abs() < 0.001);
        assert_eq!(m.expected_physical_distance(0.0), 0.0);
        assert_relative_eq!(m.expected_physical_distance(19.685), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn white_image_leaves_the_surface_untouched() {
        let s = capsule();
        let img = GrayscaleImage::new(1024, 1024, 500.0, 255).unwrap();
        let out = map_image_to_surface(&img, &s, 16.79, 0.33, Wrap::Full).unwrap();
        assert_eq!(out.vertices, s.mesh.vertices);
        assert_eq!(out.faces, s.mesh.faces);
    }

    #[test]
    fn black_image_displaces_every_vertex_by_the_full_height() {
        let s = capsule();
        let img = GrayscaleImage::new(1024, 1024, 500.0, 0).unwrap();
        let out = map_image_to_surface(&img, &s, 16.79, 0.33, Wrap::Full).unwrap();
        for i in 0..out.vertices.len() {
            let d = out.vertices[i] - s.mesh.vertices[i];
            assert_relative_eq!(d.length(), 0.33, epsilon = 1e-12);
            assert_relative_eq!(d.dot(s.normals[i]), 0.33, epsilon = 1e-12);
        }
        assert_eq!(out.faces, s.mesh.faces);
    }

    #[test]
    fn frontal_wrap_leaves_the_back_half_smooth() {
        let s = capsule();
        let img = GrayscaleImage::new(1024, 1024, 500.0, 0).unwrap();
        let out = map_image_to_surface(&img, &s, 16.79, 0.33, Wrap::Frontal).unwrap();
        let mut displaced = 0;
        for i in 0..out.vertices.len() {
            let (u, _) = s.uv[i];
            let d = (out.vertices[i] - s.mesh.vertices[i]).length();
            if (0.25..=0.75).contains(&u) {
                assert_relative_eq!(d, 0.33, epsilon = 1e-12);
                displaced += 1;
            } else {
                assert_eq!(d, 0.0, "vertex at u={} outside wrap moved", u);
            }
        }
        assert!(displaced > 0);
    }

    #[test]
    fn darker_images_displace_at_least_as_much() {
        let s = capsule();
        let img = sine_grating(GratingKind::Vertical, 10.0, 512, 1024, 500.0).unwrap();
        let darker = GrayscaleImage::from_pixels(
            512,
            1024,
            500.0,
            img.pixels().iter().map(|&p| p.saturating_sub(40)).collect(),
        )
        .unwrap();
        let a = map_image_to_surface(&img, &s, 16.79, 0.33, Wrap::Frontal).unwrap();
        let b = map_image_to_surface(&darker, &s, 16.79, 0.33, Wrap::Frontal).unwrap();
        for i in 0..a.vertices.len() {
            let da = (a.vertices[i] - s.mesh.vertices[i]).dot(s.normals[i]);
            let db = (b.vertices[i] - s.mesh.vertices[i]).dot(s.normals[i]);
            assert!(db >= da - 1e-12, "darker image displaced less at vertex {}", i);
        }
    }

    #[test]
    fn undersized_image_is_rejected_with_requirements() {
        let s = capsule();
        let img = GrayscaleImage::new(64, 64, 500.0, 255).unwrap();
        match map_image_to_surface(&img, &s, 16.79, 0.33, Wrap::Full) {
            Err(ProjectionError::ImageTooSmall { required_w, required_h, actual_w, actual_h }) => {
                // Full wrap of a 16 mm capsule: 2 pi 8 = 50.27 mm around,
                // 30 + 4 pi = 42.57 mm along the meridian.
                assert_eq!(required_w, (50.26548_f64 * 16.79).ceil() as u32);
                assert_eq!(required_h, (42.56637_f64 * 16.79).ceil() as u32);
                assert_eq!((actual_w, actual_h), (64, 64));
            }
            other => panic!("expected ImageTooSmall, got {:?}", other),
        }
    }

    #[test]
    fn bad_parameters_are_rejected() {
        let s = capsule();
        let img = GrayscaleImage::new(1024, 1024, 500.0, 255).unwrap();
        assert!(matches!(
            map_image_to_surface(&img, &s, 16.79, 0.0, Wrap::Full),
            Err(ProjectionError::BadRidgeHeight { .. })
        ));
        assert!(matches!(
            map_image_to_surface(&img, &s, -1.0, 0.33, Wrap::Full),
            Err(ProjectionError::BadScale { .. })
        ));
        assert!(matches!(
            make_smooth_finger(0.0, 30.0, 64, 64),
            Err(ProjectionError::BadFingerDimensions { .. })
        ));
        assert!(matches!(
            make_smooth_finger(16.0, 30.0, 4, 64),
            Err(ProjectionError::TooFewSegments { .. })
        ));
    }

    #[test]
    fn compensated_scale_decreases_in_every_error_term() {
        let base = ScaleModel::default();
        let bumped = [
            ScaleModel { e_model: base.e_model + 0.01, ..base },
            ScaleModel { e_print: base.e_print + 0.01, ..base },
            ScaleModel { e_cast: base.e_cast + 0.01, ..base },
        ];
        for b in bumped {
            assert!(b.compensated_scale(true) < base.compensated_scale(true));
        }
    }
}
