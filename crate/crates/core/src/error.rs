use thiserror::Error;

/// Errors raised anywhere in the link simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("decode failed: {0}")]
    Decode(String),
    #[error("frequency offset estimation failed: {0}")]
    EstimationFailed(String),
    #[error("frame synchronization failed: {0}")]
    SyncFailed(String),
    #[error("equalizer training failed: {0}")]
    TrainingFailed(String),
    #[error("trellis has {states} states, above the cap of {cap}")]
    Complexity { states: usize, cap: usize },
    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
