//! Pipeline configuration: flat `section.key = value` text, one assignment
//! per line, `#` comments. Every key is known and typed; anything else is
//! rejected so typos cannot silently fall back to defaults.

use std::path::{Path, PathBuf};

use fptarget_core::mold::MoldSpec;
use fptarget_core::projection::{ScaleModel, Wrap};
use fptarget_core::scaffold::ScaffoldSpec;
use fptarget_core::pattern::GratingKind;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected 'key = value', got {text:?}")]
    NotAnAssignment { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key '{key}' was already set")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value for '{key}': {reason}")]
    BadValue { line: usize, key: String, reason: String },
    #[error("input.image and pattern.* are mutually exclusive")]
    ConflictingInput,
}

/// Where the fingerprint raster comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum PatternInput {
    Grating { kind: GratingKind, period_px: f64, width_px: u32, height_px: u32, ppi: f64 },
    Image { path: PathBuf, ppi_override: Option<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FingerSpec {
    pub diameter_mm: f64,
    pub length_mm: f64,
    pub circumferential_segments: u32,
    pub axial_segments: u32,
}

impl Default for FingerSpec {
    fn default() -> Self {
        FingerSpec {
            diameter_mm: 27.0,
            length_mm: 25.0,
            circumferential_segments: 512,
            axial_segments: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub input: PatternInput,
    pub finger: FingerSpec,
    pub scale: ScaleModel,
    pub include_cast: bool,
    pub ridge_height_mm: f64,
    pub wrap: Wrap,
    pub mold: MoldSpec,
    pub scaffold: ScaffoldSpec,
    pub output_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PatternInput::Grating {
                kind: GratingKind::Circular,
                period_px: 10.0,
                width_px: 800,
                height_px: 800,
                ppi: 500.0,
            },
            finger: FingerSpec::default(),
            scale: ScaleModel::default(),
            include_cast: false,
            ridge_height_mm: 0.33,
            wrap: Wrap::Frontal,
            mold: MoldSpec::default(),
            scaffold: ScaffoldSpec::default(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl PipelineConfig {
    pub fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut config = PipelineConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        let mut image_path: Option<PathBuf> = None;
        let mut image_ppi: Option<f64> = None;
        let mut pattern_touched = false;

        for (number, raw) in text.lines().enumerate() {
            let line = number + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| {
                ConfigError::NotAnAssignment { line, text: content.to_string() }
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey { line, key: key.to_string() });
            }
            let bad = |reason: String| ConfigError::BadValue {
                line,
                key: key.to_string(),
                reason,
            };
            let f64_of = |value: &str| {
                value.parse::<f64>().map_err(|e| bad(e.to_string()))
            };
            let u32_of = |value: &str| {
                value.parse::<u32>().map_err(|e| bad(e.to_string()))
            };
            let bool_of = |value: &str| match value {
                "true" => Ok(true),
                "false" => Ok(false),
                other => Err(bad(format!("expected true/false, got '{}'", other))),
            };

            match key {
                "input.image" => image_path = Some(PathBuf::from(value)),
                "input.ppi" => image_ppi = Some(f64_of(value)?),
                "pattern.kind" => {
                    pattern_touched = true;
                    let kind = match value {
                        "vertical" => GratingKind::Vertical,
                        "horizontal" => GratingKind::Horizontal,
                        "circular" => GratingKind::Circular,
                        other => {
                            return Err(bad(format!(
                                "expected vertical/horizontal/circular, got '{}'",
                                other
                            )))
                        }
                    };
                    if let PatternInput::Grating { kind: slot, .. } = &mut config.input {
                        *slot = kind;
                    }
                }
                "pattern.period_px" => {
                    pattern_touched = true;
                    if let PatternInput::Grating { period_px, .. } = &mut config.input {
                        *period_px = f64_of(value)?;
                    }
                }
                "pattern.width_px" => {
                    pattern_touched = true;
                    if let PatternInput::Grating { width_px, .. } = &mut config.input {
                        *width_px = u32_of(value)?;
                    }
                }
                "pattern.height_px" => {
                    pattern_touched = true;
                    if let PatternInput::Grating { height_px, .. } = &mut config.input {
                        *height_px = u32_of(value)?;
                    }
                }
                "pattern.ppi" => {
                    pattern_touched = true;
                    if let PatternInput::Grating { ppi, .. } = &mut config.input {
                        *ppi = f64_of(value)?;
                    }
                }
                "finger.diameter_mm" => config.finger.diameter_mm = f64_of(value)?,
                "finger.length_mm" => config.finger.length_mm = f64_of(value)?,
                "finger.circumferential_segments" => {
                    config.finger.circumferential_segments = u32_of(value)?
                }
                "finger.axial_segments" => config.finger.axial_segments = u32_of(value)?,
                "scale.nominal_px_per_mm" => config.scale.nominal_px_per_mm = f64_of(value)?,
                "scale.e_model" => config.scale.e_model = f64_of(value)?,
                "scale.e_print" => config.scale.e_print = f64_of(value)?,
                "scale.e_cast" => config.scale.e_cast = f64_of(value)?,
                "scale.include_cast" => config.include_cast = bool_of(value)?,
                "projection.ridge_height_mm" => config.ridge_height_mm = f64_of(value)?,
                "projection.wrap" => {
                    config.wrap = match value {
                        "frontal" => Wrap::Frontal,
                        "full" => Wrap::Full,
                        other => {
                            return Err(bad(format!("expected frontal/full, got '{}'", other)))
                        }
                    }
                }
                "mold.shell_diameter_mm" => config.mold.shell_diameter_mm = f64_of(value)?,
                "mold.height_factor" => config.mold.height_factor = f64_of(value)?,
                "mold.min_wall_mm" => config.mold.min_wall_mm = f64_of(value)?,
                "mold.lock_length_mm" => config.mold.lock_length_mm = f64_of(value)?,
                "mold.lock_width_mm" => config.mold.lock_cross_section_mm.0 = f64_of(value)?,
                "mold.lock_height_mm" => config.mold.lock_cross_section_mm.1 = f64_of(value)?,
                "mold.shell_segments" => config.mold.shell_segments = u32_of(value)?,
                "scaffold.wall_mm" => config.scaffold.wall_mm = f64_of(value)?,
                "scaffold.cutout_mm" => config.scaffold.cutout_mm = f64_of(value)?,
                "scaffold.shrink_offset_mm" => {
                    config.scaffold.shrink_offset_mm = f64_of(value)?
                }
                "scaffold.clearance_above_mold_mm" => {
                    config.scaffold.clearance_above_mold_mm = f64_of(value)?
                }
                "output.dir" => config.output_dir = PathBuf::from(value),
                _ => return Err(ConfigError::UnknownKey { line, key: key.to_string() }),
            }
        }

        if let Some(path) = image_path {
            if pattern_touched {
                return Err(ConfigError::ConflictingInput);
            }
            config.input = PatternInput::Image { path, ppi_override: image_ppi };
        }
        Ok(config)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config = Self::from_str(&text)?;
        // Relative output directories resolve against the config file.
        if config.output_dir.is_relative() {
            if let Some(parent) = path.parent() {
                config.output_dir = parent.join(&config.output_dir);
            }
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_survive_an_empty_config() {
        let config = PipelineConfig::from_str("# nothing here\n\n").unwrap();
        assert_eq!(config, PipelineConfig::default());
    }

    #[test]
    fn assignments_reach_their_specs() {
        let text = "\
mold.shell_diameter_mm = 36\n\
scaffold.wall_mm = 10 # thicker walls\n\
pattern.kind = vertical\n\
finger.diameter_mm = 24\n\
scale.include_cast = true\n\
projection.wrap = full\n\
output.dir = artifacts\n";
        let config = PipelineConfig::from_str(text).unwrap();
        assert_eq!(config.mold.shell_diameter_mm, 36.0);
        assert_eq!(config.scaffold.wall_mm, 10.0);
        assert_eq!(config.finger.diameter_mm, 24.0);
        assert!(config.include_cast);
        assert_eq!(config.wrap, Wrap::Full);
        assert_eq!(config.output_dir, PathBuf::from("artifacts"));
        assert!(matches!(
            config.input,
            PatternInput::Grating { kind: GratingKind::Vertical, .. }
        ));
    }

    #[test]
    fn unknown_duplicate_and_conflicting_keys_are_rejected() {
        assert!(matches!(
            PipelineConfig::from_str("mold.shell_dia = 34\n"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            PipelineConfig::from_str("scaffold.wall_mm = 9\nscaffold.wall_mm = 10\n"),
            Err(ConfigError::DuplicateKey { line: 2, .. })
        ));
        assert!(matches!(
            PipelineConfig::from_str("input.image = a.pgm\npattern.period_px = 10\n"),
            Err(ConfigError::ConflictingInput)
        ));
        assert!(matches!(
            PipelineConfig::from_str("just words\n"),
            Err(ConfigError::NotAnAssignment { line: 1, .. })
        ));
        assert!(matches!(
            PipelineConfig::from_str("mold.height_factor = tall\n"),
            Err(ConfigError::BadValue { line: 1, .. })
        ));
    }
}
