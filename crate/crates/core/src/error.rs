use thiserror::Error;

/// Errors raised by the splitting toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid subspace: {0}")]
    InvalidSubspace(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A modulus/step-size precondition does not hold, so the resolvent is not
    /// guaranteed to be single-valued with full domain.
    #[error("regime violation: {0}")]
    Regime(String),

    #[error("operator `{0}` is set-valued and has no direct evaluation")]
    UnsupportedEval(&'static str),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("usage: {0}")]
    Usage(String),

    /// Parameter validation failed; carries the names of the failed conditions.
    #[error("validation failed: {}", .0.join(", "))]
    Validation(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
