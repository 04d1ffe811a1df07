//! End-to-end electronic fabrication: pattern or image in, printable STL
//! parts plus dimension/validation reports and a hashed manifest out.
//!
//! Every stage is deterministic, so two runs of the same config produce
//! byte-identical files and therefore identical manifests.

use std::fmt;
use std::path::{Path, PathBuf};

use fptarget_core::mold::{build_mold, MoldDimensions};
use fptarget_core::pattern::sine_grating;
use fptarget_core::projection::{make_smooth_finger, map_image_to_surface};
use fptarget_core::scaffold::{build_scaffold, ScaffoldDimensions};
use sha2::{Digest, Sha256};

use crate::config::{PatternInput, PipelineConfig};
use crate::pgm::load_image;
use crate::stl::stl_bytes;

/// A stage failure, carrying the stage name for the operator.
#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "pipeline stage '{}' failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for PipelineError {}

fn at_stage<T, E: fmt::Display>(
    stage: &'static str,
    result: Result<T, E>,
) -> Result<T, PipelineError> {
    result.map_err(|e| PipelineError { stage, message: e.to_string() })
}

/// One manifest row. Paths are bare file names, so the manifest depends only
/// on the artifact contents, never on where they were written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug)]
pub struct PipelineOutput {
    pub output_dir: PathBuf,
    pub manifest_path: PathBuf,
    /// Rows in manifest order (alphabetical by file name).
    pub manifest: Vec<ManifestEntry>,
    pub mold_dimensions: MoldDimensions,
    pub scaffold_dimensions: ScaffoldDimensions,
    pub compensated_px_per_mm: f64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut acc, b| {
            use fmt::Write;
            let _ = write!(acc, "{:02x}", b);
            acc
        })
}

/// Run the electronic stages: pattern, projection, mold, scaffold, validate,
/// write. Files land in `config.output_dir` (created if missing); the
/// manifest is written last so it always describes a complete set.
pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    // Stage: pattern.
    let image = match &config.input {
        PatternInput::Grating { kind, period_px, width_px, height_px, ppi } => at_stage(
            "pattern",
            sine_grating(*kind, *period_px, *width_px, *height_px, *ppi),
        )?,
        PatternInput::Image { path, ppi_override } => {
            at_stage("pattern", load_image(path, *ppi_override))?
        }
    };

    // Mold-stage precondition, checked up front: the nominal wall rule only
    // needs config values, and a doomed shell should fail before minutes of
    // tessellation. The stage name stays "mold" because that is whose
    // requirement is violated.
    let finger = &config.finger;
    let needed = finger.diameter_mm + 2.0 * config.mold.min_wall_mm;
    if config.mold.shell_diameter_mm < needed {
        return Err(PipelineError {
            stage: "mold",
            message: format!(
                "shell diameter {} mm cannot hold a {} mm finger with {} mm walls (needs {} mm)",
                config.mold.shell_diameter_mm,
                finger.diameter_mm,
                config.mold.min_wall_mm,
                needed
            ),
        });
    }

    // Stage: projection.
    at_stage("projection", config.scale.validate())?;
    let surface = at_stage(
        "projection",
        make_smooth_finger(
            finger.diameter_mm,
            finger.length_mm,
            finger.circumferential_segments,
            finger.axial_segments,
        ),
    )?;
    let scale = config.scale.compensated_scale(config.include_cast);
    let displaced = at_stage(
        "projection",
        map_image_to_surface(&image, &surface, scale, config.ridge_height_mm, config.wrap),
    )?;

    // Stage: mold.
    let assembly = at_stage("mold", build_mold(&displaced, surface.height_mm(), &config.mold))?;

    // Stage: scaffold.
    let scaffold = at_stage(
        "scaffold",
        build_scaffold(&config.mold, &config.scaffold, &surface),
    )?;

    // Stage: validate. Every printable part must be sound before anything is
    // written.
    let parts: [(&'static str, &fptarget_core::TriangleMesh); 6] = [
        ("mold_half_a", &assembly.half_above),
        ("mold_half_b", &assembly.half_below),
        ("scaffold_base", &scaffold.base),
        ("scaffold_side_a", &scaffold.side_a),
        ("scaffold_side_b", &scaffold.side_b),
        ("scaffold_top", &scaffold.top),
    ];
    let mut validation = String::new();
    for (name, mesh) in parts {
        let report = mesh.validate();
        validation.push_str(&format!("[{}]\n{}\n\n", name, report));
        if !report.is_sound() {
            return Err(PipelineError {
                stage: "validate",
                message: format!("part {} is not watertight/sound:\n{}", name, report),
            });
        }
    }

    let mold_dims = assembly.dimensions();
    let scaffold_dims = scaffold.dims;
    let dimensions = format!(
        "[scale]\n\
         nominal_px_per_mm      {:.3}\n\
         total_error_pct        {:.2}\n\
         compensated_px_per_mm  {:.2}\n\
         ridge_height_mm        {:.3}\n\
         \n[mold]\n{}\n\
         \n[scaffold]\n{}\n",
        config.scale.nominal_px_per_mm,
        100.0 * config.scale.total_error(config.include_cast),
        scale,
        config.ridge_height_mm,
        mold_dims,
        scaffold_dims,
    );

    // Stage: write. Build every artifact in memory first, then emit in
    // alphabetical order, manifest last.
    let stl = |mesh: &fptarget_core::TriangleMesh| at_stage("write", stl_bytes(mesh));
    let mut files: Vec<(&'static str, Vec<u8>)> = vec![
        ("dimensions.txt", dimensions.into_bytes()),
        ("validation.txt", validation.into_bytes()),
    ];
    for (name, mesh) in parts {
        let file = match name {
            "mold_half_a" => "mold_half_a.stl",
            "mold_half_b" => "mold_half_b.stl",
            "scaffold_base" => "scaffold_base.stl",
            "scaffold_side_a" => "scaffold_side_a.stl",
            "scaffold_side_b" => "scaffold_side_b.stl",
            _ => "scaffold_top.stl",
        };
        files.push((file, stl(mesh)?));
    }
    files.sort_by_key(|(name, _)| *name);

    let dir = &config.output_dir;
    at_stage("write", std::fs::create_dir_all(dir).map_err(|e| named_io(dir, e)))?;
    let mut manifest = Vec::with_capacity(files.len());
    for (name, bytes) in &files {
        let path = dir.join(name);
        at_stage("write", std::fs::write(&path, bytes).map_err(|e| named_io(&path, e)))?;
        manifest.push(ManifestEntry {
            path: (*name).to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
    }

    let mut csv = String::from("path,bytes,sha256\n");
    for entry in &manifest {
        csv.push_str(&format!("{},{},{}\n", entry.path, entry.bytes, entry.sha256));
    }
    let manifest_path = dir.join("manifest.csv");
    at_stage(
        "write",
        std::fs::write(&manifest_path, csv).map_err(|e| named_io(&manifest_path, e)),
    )?;

    Ok(PipelineOutput {
        output_dir: dir.clone(),
        manifest_path,
        manifest,
        mold_dimensions: mold_dims,
        scaffold_dimensions: scaffold_dims,
        compensated_px_per_mm: scale,
    })
}

fn named_io(path: &Path, source: std::io::Error) -> String {
    format!("{}: {}", path.display(), source)
}
