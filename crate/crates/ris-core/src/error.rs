use thiserror::Error;

/// Errors raised by the model layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RisError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An argument would overflow the numerical implementation.
    #[error("range error: {0}")]
    Range(String),
    /// Inconsistent or mismatched inputs.
    #[error("usage error: {0}")]
    Usage(String),
    /// Adaptive quadrature hit its subdivision limit before the tolerance.
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals")]
    Quadrature {
        estimate: f64,
        error: f64,
        intervals: usize,
    },
    /// Division by a vanishing denominator.
    #[error("singular input: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, RisError>;

pub(crate) fn domain(msg: impl Into<String>) -> RisError {
    RisError::Domain(msg.into())
}

pub(crate) fn usage(msg: impl Into<String>) -> RisError {
    RisError::Usage(msg.into())
}
