use thiserror::Error;

/// Errors raised by the library. Contract violations carry a short
/// description of the violated precondition.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invariant check `{check}` failed: {detail}")]
    Invariant { check: &'static str, detail: String },

    #[error("data error: {0}")]
    Data(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invariant(check: &'static str, detail: impl Into<String>) -> Self {
        Error::Invariant { check, detail: detail.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
