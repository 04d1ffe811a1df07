//! CSV serialization of the interoperability score matrix: one row per
//! (enroll reader, probe reader) cell.

use std::path::Path;

use fptarget_core::interop::ScoreMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
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
    #[error("{path} row {row}: {reason}")]
    BadRow { path: String, row: usize, reason: String },
}

const COLUMNS: [&str; 9] = [
    "enroll_reader",
    "probe_reader",
    "mu_genuine",
    "mu_imposter",
    "tar_pct",
    "far_pct",
    "genuine_count",
    "imposter_count",
    "threshold",
];

pub fn matrix_csv_bytes(matrix: &ScoreMatrix) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COLUMNS).expect("writing to memory cannot fail");
    for cell in &matrix.cells {
        writer
            .write_record([
                cell.enroll_reader.as_str(),
                cell.probe_reader.as_str(),
                &format!("{:.2}", cell.mean_genuine),
                &format!("{:.2}", cell.mean_imposter),
                &format!("{:.4}", 100.0 * cell.tar),
                &format!("{:.4}", 100.0 * cell.far),
                &cell.genuine.len().to_string(),
                &cell.imposter.len().to_string(),
                &matrix.threshold.to_string(),
            ])
            .expect("writing to memory cannot fail");
    }
    writer.into_inner().expect("writing to memory cannot fail")
}

pub fn write_matrix_csv(matrix: &ScoreMatrix, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    std::fs::write(path, matrix_csv_bytes(matrix)).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// One parsed row of a matrix CSV, for tooling and roundtrip checks.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixCsvRow {
    pub enroll_reader: String,
    pub probe_reader: String,
    pub mu_genuine: f64,
    pub mu_imposter: f64,
    pub tar_pct: f64,
    pub far_pct: f64,
    pub genuine_count: usize,
    pub imposter_count: usize,
    pub threshold: f64,
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Vec<MatrixCsvRow>, ReportError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let named = |source| ReportError::Csv { path: path.display().to_string(), source };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (n, record) in reader.records().enumerate() {
        let row = n + 2;
        let record = record.map_err(named)?;
        let bad = |reason: String| ReportError::BadRow {
            path: path.display().to_string(),
            row,
            reason,
        };
        if record.len() != COLUMNS.len() {
            return Err(bad(format!(
                "expected {} fields, found {}",
                COLUMNS.len(),
                record.len()
            )));
        }
        let text = |i: usize| record.get(i).unwrap_or("").to_string();
        let f64_at = |i: usize| {
            record
                .get(i)
                .unwrap_or("")
                .parse::<f64>()
                .map_err(|e| bad(format!("{}: {}", COLUMNS[i], e)))
        };
        let usize_at = |i: usize| {
            record
                .get(i)
                .unwrap_or("")
                .parse::<usize>()
                .map_err(|e| bad(format!("{}: {}", COLUMNS[i], e)))
        };
        rows.push(MatrixCsvRow {
            enroll_reader: text(0),
            probe_reader: text(1),
            mu_genuine: f64_at(2)?,
            mu_imposter: f64_at(3)?,
            tar_pct: f64_at(4)?,
            far_pct: f64_at(5)?,
            genuine_count: usize_at(6)?,
            imposter_count: usize_at(7)?,
            threshold: f64_at(8)?,
        });
    }
    Ok(rows)
}
