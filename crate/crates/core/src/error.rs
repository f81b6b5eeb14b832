//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by any module in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("SVD did not converge within {0} sweeps")]
    SvdNoConvergence(usize),

    #[error("epsilon {epsilon} is below the residual floor {floor} of the system")]
    InfeasibleEpsilon { epsilon: f64, floor: f64 },

    #[error("matrix has an all-zero column at index {0}")]
    ZeroColumn(usize),

    #[error("matrix is near-singular (condition number {0:.3e})")]
    NearSingular(f64),

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("test set shares {0} pixel(s) with the dictionary's training set")]
    TrainTestOverlap(usize),

    // ENVI ingestion failures, each distinct so callers can report precisely.
    #[error("missing header key '{0}'")]
    MissingKey(String),

    #[error("unsupported interleave '{0}' (only bsq is supported)")]
    UnsupportedInterleave(String),

    #[error("unsupported data type {0} (only 4 = float32 and 5 = float64)")]
    UnsupportedDataType(u32),

    #[error("data file size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { expected: u64, actual: u64 },

    #[error("no data file found beside header '{0}'")]
    MissingDataFile(String),

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad
    /// inputs or I/O). The CLI maps these to a distinct exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SvdNoConvergence(_)
                | Error::InfeasibleEpsilon { .. }
                | Error::NearSingular(_)
                | Error::NonFinite(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
