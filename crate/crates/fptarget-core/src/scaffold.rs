//! Scaffolding framework: base with mold cutout, two side walls, and the
//! top plate carrying the normal-offset inner surface S'.
//!
//! Assembly frame: the base slab sits on z = 0 with the mold dropped
//! through its square cutout, lock bars resting on the z = 0 plane. The
//! mold mouth therefore opens at `lock_height + shell_height`, and S' hangs
//! tip-down from the top plate so its base ring lies exactly in the mouth
//! plane. Casting material fills the offset gap between the mold cavity and
//! S', curing into a wearable shell of the offset thickness.

use alloc::format;
use alloc::string::String;
use core::fmt;
use thiserror::Error;

use crate::math::{Affine, Vec3};
use crate::mesh::{cuboid, slab_with_square_hole, MeshError, TriangleMesh};
use crate::mold::MoldSpec;
use crate::projection::FingerSurface;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ScaffoldError {
    #[error("scaffold spec invalid: {reason}")]
    BadSpec { reason: String },
    #[error(
        "offset {offset_mm} mm meets or exceeds the minimum surface radius {min_radius_mm} mm; \
         the shrunken surface would invert"
    )]
    OffsetTooLarge { offset_mm: f64, min_radius_mm: f64 },
    #[error(
        "base cutout {cutout_mm} mm does not match the mold shell diameter {shell_mm} mm; \
         the mold would not register"
    )]
    CutoutMismatch { cutout_mm: f64, shell_mm: f64 },
    #[error(
        "casting gap {gap_mm} mm is below the 0.1 mm minimum everywhere \
         (the gap between the cavity and S' is the shrink offset itself)"
    )]
    CastingGapTooSmall { gap_mm: f64 },
    #[error("scaffold {part} failed closure: {boundary_loops} boundary loop(s) remain")]
    NotWatertight { part: &'static str, boundary_loops: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Wall, cutout, and suspension dimensioning for the framework.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaffoldSpec {
    /// Thickness of the base slab, side walls, and top plate.
    pub wall_mm: f64,
    /// Square base cutout; must equal the mold shell diameter.
    pub cutout_mm: f64,
    /// Normal-offset distance for S' (the cast shell thickness).
    pub shrink_offset_mm: f64,
    /// Side wall rise above the mold mouth, so the plate clears the mold.
    pub clearance_above_mold_mm: f64,
}

impl Default for ScaffoldSpec {
    fn default() -> Self {
        ScaffoldSpec {
            wall_mm: 9.0,
            cutout_mm: 34.0,
            shrink_offset_mm: 1.5,
            clearance_above_mold_mm: 20.0,
        }
    }
}

impl ScaffoldSpec {
    pub fn validate(&self) -> Result<(), ScaffoldError> {
        let bad = |reason: String| Err(ScaffoldError::BadSpec { reason });
        if !(self.wall_mm.is_finite() && self.wall_mm > 0.0) {
            return bad(format!("wall {} mm not positive", self.wall_mm));
        }
        if !(self.cutout_mm.is_finite() && self.cutout_mm > 0.0) {
            return bad(format!("cutout {} mm not positive", self.cutout_mm));
        }
        if !(self.shrink_offset_mm.is_finite() && self.shrink_offset_mm >= 0.0) {
            return bad(format!("shrink offset {} mm negative", self.shrink_offset_mm));
        }
        if !(self.clearance_above_mold_mm.is_finite() && self.clearance_above_mold_mm > 0.0) {
            return bad(format!(
                "clearance above mold {} mm must be positive",
                self.clearance_above_mold_mm
            ));
        }
        Ok(())
    }
}

/// Derived scaffold dimensions, for the pipeline's report file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaffoldDimensions {
    pub wall_mm: f64,
    pub base_outer_mm: f64,
    pub cutout_mm: f64,
    pub shrink_offset_mm: f64,
    /// Radius of S' at its base ring (and of the plate suspension tube).
    pub tube_radius_mm: f64,
    /// Height of the mold mouth plane above the table.
    pub mouth_z_mm: f64,
    pub side_top_z_mm: f64,
    pub plate_top_z_mm: f64,
}

impl fmt::Display for ScaffoldDimensions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "wall_mm            {:.3}", self.wall_mm)?;
        writeln!(f, "base_outer_mm      {:.3}", self.base_outer_mm)?;
        writeln!(f, "cutout_mm          {:.3}", self.cutout_mm)?;
        writeln!(f, "shrink_offset_mm   {:.3}", self.shrink_offset_mm)?;
        writeln!(f, "tube_radius_mm     {:.3}", self.tube_radius_mm)?;
        writeln!(f, "mouth_z_mm         {:.3}", self.mouth_z_mm)?;
        writeln!(f, "side_top_z_mm      {:.3}", self.side_top_z_mm)?;
        write!(f, "plate_top_z_mm     {:.3}", self.plate_top_z_mm)
    }
}

/// The four printable framework parts, each watertight.
#[derive(Clone, Debug)]
pub struct ScaffoldParts {
    pub base: TriangleMesh,
    /// Wall on the +x side.
    pub side_a: TriangleMesh,
    /// Wall on the -x side.
    pub side_b: TriangleMesh,
    /// Top plate with the suspended, fan-capped S'.
    pub top: TriangleMesh,
    pub dims: ScaffoldDimensions,
}

impl ScaffoldParts {
    /// Parts with stable names, in emission order.
    pub fn named(&self) -> [(&'static str, &TriangleMesh); 4] {
        [
            ("scaffold_base", &self.base),
            ("scaffold_side_a", &self.side_a),
            ("scaffold_side_b", &self.side_b),
            ("scaffold_top", &self.top),
        ]
    }
}

/// Offset every vertex inward along its analytic normal (v' = v - n * d),
/// without closing the base.
fn shrink_open(surface: &FingerSurface, offset_mm: f64) -> Result<TriangleMesh, ScaffoldError> {
    if !(offset_mm.is_finite() && offset_mm >= 0.0) {
        return Err(ScaffoldError::BadSpec {
            reason: format!("shrink offset {} mm negative", offset_mm),
        });
    }
    // The capsule's minimum local radius is its body radius; at or beyond it
    // the tip would pass through the axis.
    if offset_mm >= surface.radius_mm {
        return Err(ScaffoldError::OffsetTooLarge {
            offset_mm,
            min_radius_mm: surface.radius_mm,
        });
    }
    let mut mesh = surface.mesh.clone();
    for (v, n) in mesh.vertices.iter_mut().zip(&surface.normals) {
        *v = *v - *n * offset_mm;
    }
    Ok(mesh)
}

/// The shrunken inner surface S': every vertex moved `offset_mm` along the
/// negated normal, with the open base closed by a triangle fan.
pub fn shrink_surface(
    surface: &FingerSurface,
    offset_mm: f64,
) -> Result<TriangleMesh, ScaffoldError> {
    let mut mesh = shrink_open(surface, offset_mm)?;
    let loops = mesh.boundary_loops()?;
    for ring in &loops {
        mesh.fan_cap(ring)?;
    }
    Ok(mesh)
}

/// Build the four scaffold parts around a mold of the given spec for the
/// given smooth finger surface.
///
/// S' is derived from the smooth surface (not the ridge-displaced one), so
/// the cast shell keeps the offset thickness under the ridges.
pub fn build_scaffold(
    mold_spec: &MoldSpec,
    spec: &ScaffoldSpec,
    surface: &FingerSurface,
) -> Result<ScaffoldParts, ScaffoldError> {
    spec.validate()?;
    if (spec.cutout_mm - mold_spec.shell_diameter_mm).abs() > 1e-9 {
        return Err(ScaffoldError::CutoutMismatch {
            cutout_mm: spec.cutout_mm,
            shell_mm: mold_spec.shell_diameter_mm,
        });
    }
    if spec.shrink_offset_mm < 0.1 {
        return Err(ScaffoldError::CastingGapTooSmall { gap_mm: spec.shrink_offset_mm });
    }

    let wall = spec.wall_mm;
    let half = spec.cutout_mm / 2.0;
    let outer_half = half + wall;
    let lock_height = mold_spec.lock_cross_section_mm.1;
    let mouth_z = lock_height + mold_spec.height_factor * surface.height_mm();
    let side_top_z = mouth_z + spec.clearance_above_mold_mm;

    let base = slab_with_square_hole(
        0.0,
        0.0,
        2.0 * outer_half,
        2.0 * outer_half,
        spec.cutout_mm,
        spec.cutout_mm,
        0.0,
        wall,
    );
    let side_a = cuboid(
        Vec3::new(half, -outer_half, wall),
        Vec3::new(outer_half, outer_half, side_top_z),
    );
    let side_b = cuboid(
        Vec3::new(-outer_half, -outer_half, wall),
        Vec3::new(-half, outer_half, side_top_z),
    );

    // S' hangs tip-down with its base ring in the mouth plane, reaching the
    // plate underside through a straight suspension tube; the tube is capped
    // where it meets the plate, and the plate is a separate touching solid.
    let mut top = shrink_open(surface, spec.shrink_offset_mm)?;
    let pose = Affine::rotation_x(core::f64::consts::PI)
        .then_translate(Vec3::new(0.0, 0.0, mouth_z));
    top = top.transformed(&pose)?;
    let loops = top.boundary_loops()?;
    if loops.len() != 1 {
        return Err(ScaffoldError::NotWatertight {
            part: "inner surface",
            boundary_loops: loops.len(),
        });
    }
    let plate_ring = top.extrude_loop(&loops[0], Vec3::new(0.0, 0.0, side_top_z - mouth_z))?;
    top.fan_cap(&plate_ring)?;
    top.append(&cuboid(
        Vec3::new(-outer_half, -outer_half, side_top_z),
        Vec3::new(outer_half, outer_half, side_top_z + wall),
    ));

    for (part, mesh) in [
        ("base", &base),
        ("side a", &side_a),
        ("side b", &side_b),
        ("top", &top),
    ] {
        let report = mesh.validate();
        if !report.is_sound() {
            return Err(ScaffoldError::NotWatertight {
                part,
                boundary_loops: report.boundary_loop_count.unwrap_or(0),
            });
        }
    }

    Ok(ScaffoldParts {
        base,
        side_a,
        side_b,
        top,
        dims: ScaffoldDimensions {
            wall_mm: wall,
            base_outer_mm: 2.0 * outer_half,
            cutout_mm: spec.cutout_mm,
            shrink_offset_mm: spec.shrink_offset_mm,
            tube_radius_mm: surface.radius_mm - spec.shrink_offset_mm,
            mouth_z_mm: mouth_z,
            side_top_z_mm: side_top_z,
            plate_top_z_mm: side_top_z + wall,
        },
    })
}
