use thiserror::Error;

pub type Result<T> = std::result::Result<T, QuenchError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuenchError {
    #[error("invalid wall shift {0}: must be finite and non-negative")]
    InvalidDelta(f64),

    #[error("{what} = {value} outside domain [{lo}, {hi}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("tolerance {tol:e} needs more than {cap} modes")]
    TruncationCap { tol: f64, cap: usize },

    #[error("truncation inconsistency: 1 - |A|^2 = {value:e} at t = {t:e} with N = {modes}")]
    TruncationInconsistent { t: f64, value: f64, modes: usize },

    #[error(
        "quadrature did not converge: estimate {estimate:e}, error {error:e} after {intervals} intervals"
    )]
    NonConvergence {
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),
}
