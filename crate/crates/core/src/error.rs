use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A sample buffer does not match the configured OFDM framing.
    #[error("framing error: {0}")]
    Framing(String),

    /// Inconsistent system configuration (e.g. LO not homodyne).
    #[error("configuration error: {0}")]
    Config(String),

    /// The run configuration file failed to parse or validate.
    #[error("{0}")]
    ConfigFile(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A failure inside one sweep cell, with its coordinates.
    #[error("scenario `{scenario}`, distance {distance_km} km, trial {trial}: {source}")]
    Cell {
        scenario: String,
        distance_km: f64,
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
