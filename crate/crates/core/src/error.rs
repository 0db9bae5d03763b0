use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("learner failure: {0}")]
    Learner(String),

    #[error(transparent)]
    Data(#[from] crate::data::DataError),

    #[error(transparent)]
    Protocol(#[from] crate::transport::ProtocolError),

    #[error(transparent)]
    Config(#[from] crate::harness::ConfigError),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
