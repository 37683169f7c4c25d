use thiserror::Error;

/// Errors raised by mesh construction, assembly, the linear solvers and the
/// Uzawa driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("refinement level {level} exceeds the supported maximum {max}")]
    Capacity { level: u32, max: u32 },

    #[error("mesh topology error: {0}")]
    Topology(String),

    #[error("index {index} out of range (len {len})")]
    InvalidIndex { index: usize, len: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not positive definite ({0})")]
    NotPositiveDefinite(String),

    #[error(
        "IPDG operator is not positive definite with penalty eta = {eta}; \
         increase eta above the stability threshold"
    )]
    PenaltyTooSmall { eta: f64 },

    #[error("iterative solver did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
