//! Crate-wide error type.
//!
//! Errors are grouped by the stage that produced them so the CLI can map
//! them onto distinct exit codes: configuration problems (bad schema,
//! partition, or flag combinations), data problems (unreadable or
//! malformed corpora, manifests, triplet files), and metrics that are
//! undefined on the given inputs.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Schema, partition, or run-configuration problem.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data.
    #[error("data error: {0}")]
    Data(String),

    /// A requested metric has no defined value on the given inputs.
    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn undefined(msg: impl Into<String>) -> Self {
        Error::MetricUndefined(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
