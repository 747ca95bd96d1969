use thiserror::Error;

/// Errors raised by curve construction, sampling and the verification suites.
#[derive(Debug, Error)]
pub enum Error {
    #[error("digit {digit} is outside the alphabet 0..{alphabet}")]
    InvalidDigit { digit: u32, alphabet: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("missing dependency: {0}")]
    Dependency(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("degenerate sample: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
