use thiserror::Error;

/// Errors raised by validation and the numerical engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("quadrature did not converge: value {value:.6e}, error estimate {abs_err:.3e} after {evaluations} evaluations")]
    Quadrature {
        value: f64,
        abs_err: f64,
        evaluations: usize,
    },

    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("argument out of domain for {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
