//! Unified error type for the toolkit.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor or model shape mismatch; the message names the shapes involved.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Out-of-range index (vocabulary id, tensor row, target class, …).
    #[error("index error: {0}")]
    Index(String),

    /// A precondition or API contract was violated.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Malformed input data; `location` is a file:line / offset / element
    /// locator.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// Data-level inconsistency that is not a syntax error.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed or incompatible checkpoint file.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    /// Training produced a non-finite loss.
    #[error("training diverged (non-finite loss) at epoch {epoch}, batch {batch}")]
    Divergence { epoch: usize, batch: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn dimension(message: impl Into<String>) -> Self {
        Error::Dimension(message.into())
    }

    pub fn contract(message: impl Into<String>) -> Self {
        Error::Contract(message.into())
    }

    pub fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Error::Data(message.into())
    }

    pub fn checkpoint(message: impl Into<String>) -> Self {
        Error::Checkpoint(message.into())
    }
}
