use thiserror::Error;

/// Errors raised by the numerical kernels, state representations and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Tensor extents or site dimensions do not agree.
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    /// A parameter (bond dimension, site count, index, ...) is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Input data violates a precondition (normalization, hermiticity, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A decomposition or iterative method failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The requested dense object exceeds the configured memory budget.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
