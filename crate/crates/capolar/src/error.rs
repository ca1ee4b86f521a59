use thiserror::Error;

/// Errors surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration is internally inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numerical routine left its validity domain (non-finite input,
    /// no root in bracket, ...).
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// A search ended without meeting its target.
    #[error("target not reachable: {0}")]
    NotFound(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
