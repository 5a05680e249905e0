use thiserror::Error;

/// Errors raised across the crate.
///
/// The three classes map onto the runner's exit codes: domain and numeric
/// failures exit with 1, usage errors with 2.
#[derive(Debug, Error)]
pub enum Error {
    /// Inputs are well-formed but describe an impossible physical setup.
    #[error("domain error: {0}")]
    Domain(String),
    /// The caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),
    /// An iterative method failed to converge.
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
