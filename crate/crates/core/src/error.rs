use thiserror::Error;

/// Errors produced by the estimator, the closed-form theory, and the
/// simulation harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a formula.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// Input data is malformed or inconsistent with the requested plan.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Adaptive quadrature did not reach the requested tolerance.
    #[error("quadrature did not converge: estimated error {estimate:e} after {intervals} intervals")]
    Quadrature { estimate: f64, intervals: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Error {
    Error::Domain {
        op,
        reason: reason.into(),
    }
}
