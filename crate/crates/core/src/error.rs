use thiserror::Error;

/// Failure modes of the numerical kernels, oracles and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for {count} components")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} steps (best estimate [{lambda_min}, {lambda_max}])")]
    NoConvergence {
        iterations: usize,
        lambda_min: f64,
        lambda_max: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate condition number (kappa = 1): {0}")]
    Degenerate(String),

    #[error("dimension {dim} too small: {reason}; need at least {required}")]
    DimensionTooSmall {
        dim: usize,
        required: usize,
        reason: String,
    },

    #[error("adversary capacity exhausted after {queries} queries in dimension {dim}; use dim >= {required}")]
    Capacity {
        queries: usize,
        dim: usize,
        required: usize,
    },

    #[error("objective is not quadratic: gradient linearity check failed (relative mismatch {mismatch:e})")]
    NotQuadratic { mismatch: f64 },

    #[error("orthonormality violated: max deviation {deviation:e}")]
    NotOrthonormal { deviation: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
