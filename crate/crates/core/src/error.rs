use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("curvature condition s'y > 0 fails (s'y = {0:e})")]
    CurvatureNotPositive(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("labels do not form exactly two classes: {0}")]
    NonBinaryLabels(String),

    #[error("missing column: {0}")]
    MissingColumn(String),

    #[error("all paired differences are zero")]
    AllTies,

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::InvariantViolation(_) => "invariant_violation",
            Error::CurvatureNotPositive(_) => "curvature_not_positive",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Parse { .. } => "parse_error",
            Error::NonBinaryLabels(_) => "non_binary_labels",
            Error::MissingColumn(_) => "missing_column",
            Error::AllTies => "all_ties",
            Error::Config(_) => "config_error",
            Error::Io(_) => "io_error",
        }
    }
}

pub(crate) fn ensure_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
