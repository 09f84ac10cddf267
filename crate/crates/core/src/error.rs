use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum LowRankError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{0} did not converge")]
    NotConverged(&'static str),

    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("no successful solver runs to report")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LowRankError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(LowRankError::InvalidArgument(msg.into()))
}
