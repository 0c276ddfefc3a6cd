use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SclError>;

#[derive(Debug, Error)]
pub enum SclError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("generation failure: {0}")]
    GenerationFailure(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// `line` is 1-based; 0 when the location is not known.
    #[error("{origin}:{line}: {message}")]
    Parse {
        origin: String,
        line: usize,
        message: String,
    },
}

impl SclError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SclError::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(origin: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        SclError::Parse {
            origin: origin.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SclError::Io {
            path: path.into(),
            source,
        }
    }
}
