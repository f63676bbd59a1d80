//! Error type shared by every module of the crate.

use std::path::PathBuf;

/// Failure modes reported by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// An argument violates a documented precondition (length, range, membership).
    #[error("argument error: {0}")]
    Argument(String),
    /// A configuration is internally inconsistent (e.g. detector/topology mismatch).
    #[error("configuration error: {0}")]
    Config(String),
    /// A statistical model could not be built (e.g. covariance not positive definite).
    #[error("model error: {0}")]
    Model(String),
    /// A numerical routine failed to converge.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// A configuration document does not match the published schema.
    #[error("schema error: {0}")]
    Schema(String),
    /// Reading or writing a file failed.
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
    pub(crate) fn model(msg: impl Into<String>) -> Self {
        Error::Model(msg.into())
    }
    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
