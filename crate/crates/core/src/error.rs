use thiserror::Error;

use crate::config::ValidationReport;

#[derive(Debug, Error)]
pub enum FspdeError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("instability at time level {level}: {detail}")]
    Instability { level: usize, detail: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed: {0}")]
    Validation(ValidationReport),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FspdeError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(FspdeError::Domain(msg.into()))
}
