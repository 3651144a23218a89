use thiserror::Error;

/// Errors raised by the core library.
///
/// `Hypothesis` carries the name of the violated precondition so front ends
/// can report it verbatim; `Numeric` marks evaluations that could not reach
/// their accuracy target.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported range: {0}")]
    Unsupported(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error is a precondition problem (as opposed to a failed
    /// computation).
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Hypothesis(_) | Error::InvalidParams(_) | Error::Unsupported(_) | Error::SizeMismatch { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
