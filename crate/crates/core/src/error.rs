use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

use crate::loan_data::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A row that could not be parsed. `line` is 1-based and counts the header.
    #[error("{file}:{line}{}: {message}", column.map(|c| format!(":{c}")).unwrap_or_default())]
    Malformed {
        file: String,
        line: u64,
        column: Option<usize>,
        message: String,
    },

    #[error("{file}:{line}: duplicate primary key `{key}`")]
    DuplicateKey {
        file: String,
        line: u64,
        key: String,
    },

    #[error("dataset failed validation ({n} violation(s)):\n{0}", n = .0.violations.len())]
    Invalid(ValidationReport),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("infeasible generator configuration: {0}")]
    Infeasible(String),

    #[error("network snapshot is as of {snapshot}, but the feature cutoff requires {expected}")]
    SnapshotMismatch {
        snapshot: NaiveDate,
        expected: NaiveDate,
    },

    #[error("expected {expected} feature dimensions, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training data has no feature columns")]
    NoFeatures,

    #[error("training data has no rows")]
    NoRows,

    #[error("rolling schedule needs at least one window")]
    NoWindows,

    #[error("dataset timeline ends in {available} but the schedule needs data through {required}")]
    TimelineTooShort { required: String, available: String },

    #[error("model document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
