use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates its invariant. `field` names the offender.
    #[error("invalid configuration: `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on the shape or content of an input does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An iterative method failed to converge or produced non-finite values.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Newton did not converge within the iteration budget for one step.
    #[error("step rejected after {iterations} Newton iterations (residual {residual:.3e})")]
    StepRejected { iterations: usize, residual: f64 },

    /// The adaptive integrator could not continue without going below `dt_min`.
    #[error("integration failure at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    /// A bracket for a root search does not straddle the target.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// A least-squares fit could not be formed or is degenerate.
    #[error("fit failure: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
