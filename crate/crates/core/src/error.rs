use std::io;

use thiserror::Error;

/// Errors raised by scenario construction, fusion rules and experiment drivers.
#[derive(Debug, Error)]
pub enum FusionError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported size: {0}")]
    UnsupportedSize(String),

    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, FusionError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(FusionError::InvalidArgument(msg.into()))
}
