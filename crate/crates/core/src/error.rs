use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure category, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Data,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at row {row}, col {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },
    #[error("non-finite value at row {row}, col {col}")]
    NonFinite { row: usize, col: usize },
    #[error("label {label} out of range at row {row} (n_classes = {n_classes})")]
    LabelOutOfRange {
        row: usize,
        label: u64,
        n_classes: usize,
    },
    #[error("bad magic: expected \"FMX1\", found {found:?}")]
    BadMagic { found: [u8; 4] },
    #[error("empty matrix")]
    Empty,
    #[error("invalid dataset: {0}")]
    InvalidData(String),
    #[error("row-count mismatch {expected} vs {found}")]
    RowCountMismatch { expected: usize, found: usize },
    #[error("label-vector mismatch at index {index}")]
    LabelMismatch { index: usize },
    #[error("class {class} has {count} samples, too few to stratify (need {needed})")]
    ClassTooSmall {
        class: usize,
        count: usize,
        needed: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("non-finite fitness {value} at position {position:?}")]
    NonFiniteFitness { value: f64, position: Vec<f64> },
    #[error("SMO did not converge for class pair ({0}, {1})")]
    SmoNotConverged(usize, usize),
    #[error("classifier failed for mask {mask:?}: {source}")]
    Classifier {
        mask: Vec<usize>,
        #[source]
        source: Box<Error>,
    },
    #[error("class {0} absent from labels")]
    ClassAbsent(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) => ErrorCategory::Usage,
            Error::NoConvergence { .. }
            | Error::NonFiniteFitness { .. }
            | Error::SmoNotConverged(..) => ErrorCategory::Numerical,
            Error::Classifier { source, .. } | Error::Stage { source, .. } => source.category(),
            _ => ErrorCategory::Data,
        }
    }
}
