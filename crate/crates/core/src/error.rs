use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("ill-conditioned linear system (condition number {condition:.3e} exceeds {limit:.1e})")]
    IllConditioned { condition: f64, limit: f64 },

    #[error("eigen-solve failure: {0}")]
    EigenSolve(String),

    #[error("series truncation insufficient: {what} (tail estimate {tail:.3e})")]
    Truncation { what: String, tail: f64 },

    #[error("series did not converge: {0}")]
    NonConvergence(String),

    #[error("degenerate {what}: |value| = {value:.3e}")]
    Degenerate { what: String, value: f64 },

    #[error("edge extrapolation failed: {0}")]
    EdgeFit(String),

    #[error("singularity during integration at theta = {theta:.6e}: {reason}")]
    Singularity { theta: f64, reason: String },

    #[error("step size underflow at x = {0:.6e}")]
    StepUnderflow(f64),

    #[error("compatibility violation: {0}")]
    Compatibility(String),

    #[error("embedding consistency violation: {0}")]
    Embedding(String),

    #[error("positivity violation: {0}")]
    Positivity(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
