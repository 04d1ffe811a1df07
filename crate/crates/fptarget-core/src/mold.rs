//! Two-piece negative mold construction.
//!
//! Mold frame: the shell axis is +z, the closed shell bottom sits at z = 0
//! and the open casting mouth at z = shell_height. The displaced finger
//! surface (built tip-up with its base at z = 0) is inverted and hung
//! tip-down from the mouth plane. The split plane is x = 0, which contains
//! the finger axis, so the two halves are semi-cylinders.
//!
//! Anti-rotation lock bars run parallel to the split plane under the closed
//! shell end (z in [-h, 0]); when the mold is dropped into the scaffold's
//! square base cutout the bars wedge into the cutout corners.

use alloc::format;
use alloc::string::String;
use core::fmt;
use thiserror::Error;

use crate::math::{Affine, Vec3};
use crate::mesh::{cuboid, open_tube, BoundaryLoop, MeshError, Plane, TriangleMesh};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum MoldError {
    #[error("mold spec invalid: {reason}")]
    BadSpec { reason: String },
    #[error("finger height must be positive, got {height_mm} mm")]
    BadFingerHeight { height_mm: f64 },
    #[error("displaced surface must be an open tube with exactly one boundary loop, found {loops}")]
    SurfaceNotOpenTube { loops: usize },
    #[error(
        "finger interferes with the shell: wall thickness {min_wall_mm:.3} mm at \
         ({at_x:.3}, {at_y:.3}, {at_z:.3})"
    )]
    Interference { min_wall_mm: f64, at_x: f64, at_y: f64, at_z: f64 },
    #[error("mold {part} failed closure: {boundary_loops} boundary loop(s) remain")]
    NotWatertight { part: &'static str, boundary_loops: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Shell and lock dimensioning for the mold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoldSpec {
    /// Outer shell diameter; fixed so every mold fits one scaffold.
    pub shell_diameter_mm: f64,
    /// Shell height as a multiple of the finger height.
    pub height_factor: f64,
    /// Nominal minimum wall used by config validation (the rule
    /// shell >= finger + 2 * wall); the built assembly reports its measured
    /// wall separately.
    pub min_wall_mm: f64,
    /// Lock bar length (equal to the shell diameter, spanning the scaffold
    /// cutout).
    pub lock_length_mm: f64,
    /// Lock bar cross-section: (width across x, height along z).
    pub lock_cross_section_mm: (f64, f64),
    /// Shell tessellation around the circumference.
    pub shell_segments: u32,
}

impl Default for MoldSpec {
    fn default() -> Self {
        MoldSpec {
            shell_diameter_mm: 34.0,
            height_factor: 1.25,
            min_wall_mm: 3.5,
            lock_length_mm: 34.0,
            lock_cross_section_mm: (4.0, 4.0),
            shell_segments: 256,
        }
    }
}

impl MoldSpec {
    pub fn validate(&self) -> Result<(), MoldError> {
        let bad = |reason: String| Err(MoldError::BadSpec { reason });
        if !(self.shell_diameter_mm.is_finite() && self.shell_diameter_mm > 0.0) {
            return bad(format!("shell diameter {} mm not positive", self.shell_diameter_mm));
        }
        if !(self.height_factor.is_finite() && self.height_factor > 1.0) {
            return bad(format!("height factor {} must exceed 1", self.height_factor));
        }
        if !(self.min_wall_mm.is_finite() && self.min_wall_mm > 0.0) {
            return bad(format!("min wall {} mm not positive", self.min_wall_mm));
        }
        let (w, h) = self.lock_cross_section_mm;
        if !(self.lock_length_mm > 0.0 && w > 0.0 && h > 0.0) {
            return bad(format!(
                "lock dimensions {}x{}x{} mm must be positive",
                w, h, self.lock_length_mm
            ));
        }
        if self.shell_segments < 16 {
            return bad(format!("shell needs at least 16 segments, got {}", self.shell_segments));
        }
        // Require the nominal rule to be satisfiable at all: a finger of
        // diameter d fits iff d + 2 * wall <= shell diameter, so the shell
        // must at least exceed twice the wall.
        if self.shell_diameter_mm <= 2.0 * self.min_wall_mm {
            return bad(format!(
                "shell diameter {} mm leaves no cavity at wall {} mm",
                self.shell_diameter_mm, self.min_wall_mm
            ));
        }
        Ok(())
    }
}

/// Derived dimensions, for the pipeline's report file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoldDimensions {
    pub shell_diameter_mm: f64,
    pub shell_height_mm: f64,
    pub finger_height_mm: f64,
    pub measured_min_wall_mm: f64,
    pub lock_length_mm: f64,
    pub lock_cross_section_mm: (f64, f64),
}

impl fmt::Display for MoldDimensions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "shell_diameter_mm      {:.3}", self.shell_diameter_mm)?;
        writeln!(f, "shell_height_mm        {:.3}", self.shell_height_mm)?;
        writeln!(f, "finger_height_mm       {:.3}", self.finger_height_mm)?;
        writeln!(f, "measured_min_wall_mm   {:.3}", self.measured_min_wall_mm)?;
        writeln!(f, "lock_length_mm         {:.3}", self.lock_length_mm)?;
        write!(
            f,
            "lock_cross_section_mm  {:.3} x {:.3}",
            self.lock_cross_section_mm.0, self.lock_cross_section_mm.1
        )
    }
}

/// The built mold: two watertight halves plus the inner cavity surface they
/// were derived from (in mold-frame pose, normals pointing into the cavity).
#[derive(Clone, Debug)]
pub struct MoldAssembly {
    /// Half on the +x side of the split plane.
    pub half_above: TriangleMesh,
    /// Half on the -x side.
    pub half_below: TriangleMesh,
    pub spec: MoldSpec,
    pub inner_surface: TriangleMesh,
    pub finger_height_mm: f64,
}

impl MoldAssembly {
    pub fn shell_height_mm(&self) -> f64 {
        self.spec.height_factor * self.finger_height_mm
    }

    pub fn dimensions(&self) -> MoldDimensions {
        MoldDimensions {
            shell_diameter_mm: self.spec.shell_diameter_mm,
            shell_height_mm: self.shell_height_mm(),
            finger_height_mm: self.finger_height_mm,
            measured_min_wall_mm: min_wall_thickness(self),
            lock_length_mm: self.spec.lock_length_mm,
            lock_cross_section_mm: self.spec.lock_cross_section_mm,
        }
    }
}

/// Minimum radial wall: shell radius minus the largest radial reach of the
/// cavity surface. Radial (not closest-point) distance is conservative for a
/// cylindrical shell and exact on the body section.
pub fn min_wall_thickness(assembly: &MoldAssembly) -> f64 {
    min_wall_with_location(&assembly.inner_surface, assembly.spec.shell_diameter_mm / 2.0).0
}

fn min_wall_with_location(inner: &TriangleMesh, shell_radius: f64) -> (f64, Vec3) {
    let mut min_wall = f64::INFINITY;
    let mut at = Vec3::new(0.0, 0.0, 0.0);
    for v in &inner.vertices {
        let wall = shell_radius - v.radial();
        if wall < min_wall {
            min_wall = wall;
            at = *v;
        }
    }
    (min_wall, at)
}

/// Two molds are interchangeable in one scaffold when their shells and lock
/// footprints agree.
pub fn mold_halves_interchangeable(a: &MoldAssembly, b: &MoldAssembly) -> bool {
    let eq = |x: f64, y: f64| (x - y).abs() <= 1e-6;
    eq(a.spec.shell_diameter_mm, b.spec.shell_diameter_mm)
        && eq(a.spec.lock_length_mm, b.spec.lock_length_mm)
        && eq(a.spec.lock_cross_section_mm.0, b.spec.lock_cross_section_mm.0)
        && eq(a.spec.lock_cross_section_mm.1, b.spec.lock_cross_section_mm.1)
}

/// Build the two-piece negative mold from a displaced finger surface.
///
/// `displaced_surface` is the ridge-displaced finger in its construction
/// frame (base ring at z = 0, tip up at `finger_height_mm`, outward
/// normals, exactly one boundary loop). The pipeline: invert the surface,
/// pose it tip-down under the mouth plane, merge with the open shell,
/// stitch the mouth annulus, cap the shell bottom, split along x = 0,
/// flatten both cut faces, and attach one lock bar per half.
///
/// Fails on shell interference (non-positive wall). The nominal rule
/// `shell >= finger + 2 * min_wall` needs the nominal finger diameter,
/// which a displaced mesh no longer carries; callers that know it (the
/// pipeline) enforce that rule before building.
pub fn build_mold(
    displaced_surface: &TriangleMesh,
    finger_height_mm: f64,
    spec: &MoldSpec,
) -> Result<MoldAssembly, MoldError> {
    spec.validate()?;
    if !(finger_height_mm.is_finite() && finger_height_mm > 0.0) {
        return Err(MoldError::BadFingerHeight { height_mm: finger_height_mm });
    }
    let surface_loops = displaced_surface.boundary_loops()?;
    if surface_loops.len() != 1 {
        return Err(MoldError::SurfaceNotOpenTube { loops: surface_loops.len() });
    }

    let shell_radius = spec.shell_diameter_mm / 2.0;
    let shell_height = spec.height_factor * finger_height_mm;

    // Invert so normals face the cavity, then hang tip-down from the mouth.
    let pose = Affine::rotation_x(core::f64::consts::PI)
        .then_translate(Vec3::new(0.0, 0.0, shell_height));
    let inner = displaced_surface.inverted().transformed(&pose)?;

    let (min_wall, at) = min_wall_with_location(&inner, shell_radius);
    if min_wall <= 0.0 {
        return Err(MoldError::Interference {
            min_wall_mm: min_wall,
            at_x: at.x,
            at_y: at.y,
            at_z: at.z,
        });
    }

    // Shell, then the mouth annulus between shell top ring and finger base
    // ring (both in the z = shell_height plane), then the bottom cap.
    let mut solid = open_tube(shell_radius, 0.0, shell_height, spec.shell_segments);
    solid.append(&inner);
    let loops = solid.boundary_loops()?;
    debug_assert_eq!(loops.len(), 3);
    let loop_z = |l: &BoundaryLoop| solid.vertices[l.vertices[0] as usize].z;
    let loop_radius = |l: &BoundaryLoop| solid.vertices[l.vertices[0] as usize].radial();
    let mut top_shell = None;
    let mut finger_ring = None;
    let mut bottom_shell = None;
    for l in loops {
        if loop_z(&l) < shell_height * 0.5 {
            bottom_shell = Some(l);
        } else if (loop_radius(&l) - shell_radius).abs() < 1e-9 {
            top_shell = Some(l);
        } else {
            finger_ring = Some(l);
        }
    }
    let (top_shell, finger_ring, bottom_shell) = match (top_shell, finger_ring, bottom_shell) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(MoldError::NotWatertight { part: "shell merge", boundary_loops: 3 }),
    };
    solid.stitch_loops(&top_shell, &finger_ring)?;
    solid.fan_cap(&bottom_shell)?;

    let closed = solid.validate();
    if !closed.watertight {
        return Err(MoldError::NotWatertight {
            part: "closed solid",
            boundary_loops: closed.boundary_loop_count.unwrap_or(0),
        });
    }

    let split_plane =
        Plane::from_point_normal(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0))?;
    let (mut above, mut below) = solid.split_by_plane(&split_plane)?;

    for (half, name) in [(&mut above, "half above"), (&mut below, "half below")] {
        for l in half.boundary_loops()? {
            half.fill_planar_loop(&l)?;
        }
        let report = half.validate();
        if !report.is_sound() {
            return Err(MoldError::NotWatertight {
                part: name,
                boundary_loops: report.boundary_loop_count.unwrap_or(0),
            });
        }
    }

    // One lock bar per half, flush under the closed shell end so each half
    // stays a clean union of touching solids.
    let (lock_w, lock_h) = spec.lock_cross_section_mm;
    let half_len = spec.lock_length_mm / 2.0;
    let bar_centre = shell_radius - lock_w / 2.0;
    above.append(&cuboid(
        Vec3::new(bar_centre - lock_w / 2.0, -half_len, -lock_h),
        Vec3::new(bar_centre + lock_w / 2.0, half_len, 0.0),
    ));
    below.append(&cuboid(
        Vec3::new(-bar_centre - lock_w / 2.0, -half_len, -lock_h),
        Vec3::new(-bar_centre + lock_w / 2.0, half_len, 0.0),
    ));

    Ok(MoldAssembly {
        half_above: above,
        half_below: below,
        spec: *spec,
        inner_surface: inner,
        finger_height_mm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::GrayscaleImage;
    use crate::projection::{make_smooth_finger, map_image_to_surface, Wrap};
    use approx::assert_relative_eq;

    fn test_spec() -> MoldSpec {
        MoldSpec { shell_segments: 64, ..MoldSpec::default() }
    }

    fn smooth_27mm() -> (TriangleMesh, f64) {
        let s = make_smooth_finger(27.0, 30.0, 64, 24).unwrap();
        let h = s.height_mm();
        (s.mesh, h)
    }

    #[test]
    fn halves_are_sound_and_walls_match_the_worst_case() {
        let (mesh, height) = smooth_27mm();
        let assembly = build_mold(&mesh, height, &test_spec()).unwrap();
        assert!(assembly.half_above.validate().is_sound());
        assert!(assembly.half_below.validate().is_sound());
        assert_relative_eq!(min_wall_thickness(&assembly), 3.5, epsilon = 1e-9);
        assert_relative_eq!(assembly.shell_height_mm(), 1.25 * height, epsilon = 1e-12);
        // Each half stays on its side of the split plane.
        for v in &assembly.half_above.vertices {
            assert!(v.x >= -1e-9);
        }
        for v in &assembly.half_below.vertices {
            assert!(v.x <= 1e-9);
        }
    }

    #[test]
    fn sixteen_mm_finger_leaves_nine_mm_walls() {
        let s = make_smooth_finger(16.0, 30.0, 32, 12).unwrap();
        let assembly = build_mold(&s.mesh, s.height_mm(), &test_spec()).unwrap();
        assert_relative_eq!(min_wall_thickness(&assembly), 9.0, epsilon = 1e-9);
    }

    #[test]
    fn full_ridge_displacement_thins_the_wall_by_the_ridge_height() {
        let s = make_smooth_finger(27.0, 30.0, 64, 24).unwrap();
        let black = GrayscaleImage::new(2048, 1024, 500.0, 0).unwrap();
        let displaced = map_image_to_surface(&black, &s, 16.79, 0.33, Wrap::Full).unwrap();
        let assembly = build_mold(&displaced, s.height_mm(), &test_spec()).unwrap();
        assert_relative_eq!(min_wall_thickness(&assembly), 3.5 - 0.33, epsilon = 1e-9);
    }

    #[test]
    fn interference_is_rejected_with_the_offending_wall() {
        let s = make_smooth_finger(34.5, 30.0, 32, 12).unwrap();
        match build_mold(&s.mesh, s.height_mm(), &test_spec()) {
            Err(MoldError::Interference { min_wall_mm, .. }) => {
                assert!(min_wall_mm <= 0.0);
            }
            other => panic!("expected interference, got {:?}", other),
        }
    }

    #[test]
    fn solid_volume_is_shell_prism_minus_cavity() {
        let (mesh, height) = smooth_27mm();
        let spec = test_spec();
        let assembly = build_mold(&mesh, height, &spec).unwrap();

        let n = spec.shell_segments as f64;
        let r = spec.shell_diameter_mm / 2.0;
        let prism = n / 2.0 * r * r * (core::f64::consts::TAU / n).sin()
            * assembly.shell_height_mm();
        // Cavity volume: cap the original surface and measure it.
        let mut capped = mesh.clone();
        let loops = capped.boundary_loops().unwrap();
        capped.fan_cap(&loops[0]).unwrap();
        let cavity = capped.signed_volume();
        assert!(cavity > 0.0);

        let lock = {
            let (w, h) = spec.lock_cross_section_mm;
            w * h * spec.lock_length_mm
        };
        let total = assembly.half_above.signed_volume() + assembly.half_below.signed_volume();
        assert_relative_eq!(total, prism - cavity + 2.0 * lock, max_relative = 1e-9);
    }

    #[test]
    fn molds_from_different_prints_are_interchangeable() {
        let (mesh, height) = smooth_27mm();
        let a = build_mold(&mesh, height, &test_spec()).unwrap();

        let s = make_smooth_finger(16.0, 25.0, 32, 12).unwrap();
        let b = build_mold(&s.mesh, s.height_mm(), &test_spec()).unwrap();
        assert!(mold_halves_interchangeable(&a, &b));

        let narrow = MoldSpec { shell_diameter_mm: 30.0, ..test_spec() };
        let c = build_mold(&s.mesh, s.height_mm(), &narrow).unwrap();
        assert!(!mold_halves_interchangeable(&a, &c));
    }

    #[test]
    fn inner_surface_normals_face_the_cavity() {
        let (mesh, height) = smooth_27mm();
        let assembly = build_mold(&mesh, height, &test_spec()).unwrap();
        let inner = &assembly.inner_surface;
        // Sample body-section faces: their normals should point toward the
        // axis (negative dot with the radial direction of the centroid).
        let mut checked = 0;
        for f in 0..inner.faces.len() {
            let [i, j, k] = inner.faces[f];
            let c = (inner.vertices[i as usize]
                + inner.vertices[j as usize]
                + inner.vertices[k as usize])
                * (1.0 / 3.0);
            if c.radial() < 5.0 {
                continue; // skip near-axis tip faces where radial direction degenerates
            }
            let n = inner.face_normal(f).unwrap();
            let radial = Vec3::new(c.x, c.y, 0.0).normalized().unwrap();
            assert!(n.dot(radial) < 0.1, "face {} normal leans outward", f);
            checked += 1;
        }
        assert!(checked > 0);
    }
}
