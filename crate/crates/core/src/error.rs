use thiserror::Error;

/// Errors raised by the learners, generators and numerical kernels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    InvalidMatrix,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("iteration diverged after {steps} steps")]
    Divergence { steps: usize },

    #[error("constraints infeasible (max violation {max_violation:.6e})")]
    Infeasible { max_violation: f64 },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn shape_err(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

pub(crate) fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
