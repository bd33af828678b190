use thiserror::Error;

/// Errors raised by the estimators and generators in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("second-moment accumulator is identically zero")]
    ZeroAccumulator,

    #[error("normal equations are singular ({rows} rows, {cols} columns)")]
    SingularSystem { rows: usize, cols: usize },

    #[error("all mixture weights are zero")]
    ZeroWeights,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
