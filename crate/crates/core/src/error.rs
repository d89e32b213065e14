use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuenchError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} is outside its domain: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error("non-finite integrand at node {index} (k = {k})")]
    NonFinite { index: usize, k: f64 },

    #[error("no sign change of {what} found on [{lo}, {hi}]")]
    NoBracket { what: &'static str, lo: f64, hi: f64 },

    #[error("root finder did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("renormalized coupling hits the Landau pole (lambda_R * delta_lambda = {product})")]
    LandauPole { product: f64 },

    #[error("state became non-finite in mode {mode} at t = {time}")]
    Blowup { mode: usize, time: f64 },

    #[error("asymptote fit failed: {reason} (residual {residual:e})")]
    FitFailed { reason: String, residual: f64 },
}

pub type Result<T, E = QuenchError> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> QuenchError {
    QuenchError::InvalidParameter { name, reason: reason.into() }
}

pub(crate) fn domain(what: &'static str, reason: impl Into<String>) -> QuenchError {
    QuenchError::Domain { what, reason: reason.into() }
}
