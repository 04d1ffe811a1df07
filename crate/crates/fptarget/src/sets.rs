//! Loading impression sets from disk: a CSV manifest or a directory tree.
//!
//! Manifest layout (one row per impression):
//!
//! ```csv
//! reader_id,target_id,index,path
//! optical,t01,0,optical/t01/0.pgm
//! ```
//!
//! Directory layout: `<root>/<reader_id>/<target_id>/<index>.pgm` (or
//! `.png`). Relative manifest paths resolve against the manifest's own
//! directory, so corpora stay relocatable.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fptarget_core::interop::{Impression, ImpressionSet, InteropError};
use thiserror::Error;

use crate::pgm::{load_image, ImageError};

#[derive(Debug, Error)]
pub enum SetsError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: missing required column '{column}'")]
    MissingColumn { path: String, column: &'static str },
    #[error("{path} row {row}: {reason}")]
    BadRow { path: String, row: usize, reason: String },
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error("{path}: {reason}")]
    Layout { path: String, reason: String },
    #[error(transparent)]
    Interop(#[from] InteropError),
}

/// Load impression sets from a CSV manifest. Readers keep their
/// first-appearance order; entries within a set are sorted by the set itself.
pub fn load_sets_manifest(
    manifest: impl AsRef<Path>,
    ppi_override: Option<f64>,
) -> Result<Vec<ImpressionSet>, SetsError> {
    let manifest = manifest.as_ref();
    let text = std::fs::read_to_string(manifest).map_err(|source| SetsError::Io {
        path: manifest.display().to_string(),
        source,
    })?;
    let base = manifest.parent().unwrap_or_else(|| Path::new(""));
    let named = |source| SetsError::Csv { path: manifest.display().to_string(), source };

    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(named)?.clone();
    let column = |name: &'static str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or(SetsError::MissingColumn { path: manifest.display().to_string(), column: name })
    };
    let (c_reader, c_target, c_index, c_path) =
        (column("reader_id")?, column("target_id")?, column("index")?, column("path")?);

    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Vec<Impression>> = BTreeMap::new();
    for (n, record) in reader.records().enumerate() {
        let row = n + 2; // 1-based, after the header line
        let record = record.map_err(named)?;
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let bad_row = |reason: String| SetsError::BadRow {
            path: manifest.display().to_string(),
            row,
            reason,
        };
        let reader_id = field(c_reader);
        let target_id = field(c_target);
        let index: u32 = field(c_index)
            .parse()
            .map_err(|e| bad_row(format!("index: {}", e)))?;
        let rel = PathBuf::from(field(c_path));
        let path = if rel.is_absolute() { rel } else { base.join(rel) };
        let image = load_image(&path, ppi_override)?;
        if !groups.contains_key(&reader_id) {
            order.push(reader_id.clone());
        }
        groups.entry(reader_id).or_default().push(Impression {
            target_id,
            index,
            image,
            source: Some(path.display().to_string()),
        });
    }

    order
        .into_iter()
        .map(|id| {
            let entries = groups.remove(&id).expect("every ordered reader has a group");
            Ok(ImpressionSet::new(&id, entries)?)
        })
        .collect()
}

/// Load impression sets from a `<root>/<reader>/<target>/<index>.pgm|png`
/// tree. Readers and targets are taken in lexicographic name order.
pub fn load_sets_dir(
    root: impl AsRef<Path>,
    ppi_override: Option<f64>,
) -> Result<Vec<ImpressionSet>, SetsError> {
    let root = root.as_ref();
    let mut sets = Vec::new();
    for reader_dir in sorted_dirs(root)? {
        let reader_id = dir_name(&reader_dir)?;
        let mut entries = Vec::new();
        for target_dir in sorted_dirs(&reader_dir)? {
            let target_id = dir_name(&target_dir)?;
            for file in sorted_files(&target_dir)? {
                let ext = file.extension().and_then(|e| e.to_str()).unwrap_or("");
                if !matches!(ext, "pgm" | "png") {
                    continue;
                }
                let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("");
                let index: u32 = stem.parse().map_err(|_| SetsError::Layout {
                    path: file.display().to_string(),
                    reason: format!("file stem '{}' is not an impression index", stem),
                })?;
                entries.push(Impression {
                    target_id: target_id.clone(),
                    index,
                    image: load_image(&file, ppi_override)?,
                    source: Some(file.display().to_string()),
                });
            }
        }
        sets.push(ImpressionSet::new(&reader_id, entries)?);
    }
    if sets.is_empty() {
        return Err(SetsError::Layout {
            path: root.display().to_string(),
            reason: "no reader directories found".to_string(),
        });
    }
    Ok(sets)
}

fn sorted_dirs(path: &Path) -> Result<Vec<PathBuf>, SetsError> {
    Ok(sorted_children(path)?.into_iter().filter(|p| p.is_dir()).collect())
}

fn sorted_files(path: &Path) -> Result<Vec<PathBuf>, SetsError> {
    Ok(sorted_children(path)?.into_iter().filter(|p| p.is_file()).collect())
}

fn sorted_children(path: &Path) -> Result<Vec<PathBuf>, SetsError> {
    let named = |source| SetsError::Io { path: path.display().to_string(), source };
    let mut children = Vec::new();
    for entry in std::fs::read_dir(path).map_err(named)? {
        children.push(entry.map_err(named)?.path());
    }
    children.sort();
    Ok(children)
}

fn dir_name(path: &Path) -> Result<String, SetsError> {
    path.file_name()
        .and_then(|n| n.to_str())
        .map(String::from)
        .ok_or_else(|| SetsError::Layout {
            path: path.display().to_string(),
            reason: "directory name is not valid UTF-8".to_string(),
        })
}
