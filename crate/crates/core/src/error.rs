use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("degenerate field: {0}")]
    DegenerateField(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("singular integrand at x = {location} while integrating from 0 to {target}")]
    SingularIntegral { location: f64, target: f64 },

    #[error("no bound state: {0}")]
    NoBoundState(String),

    #[error("propagation diverged at step {step}")]
    Divergence { step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
