//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/layer shape mismatch.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Invalid caller-supplied data (empty sets, bad labels, out-of-range values).
    #[error("invalid input: {0}")]
    Input(String),

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),

    /// An operation was called in a state it cannot run in (unfitted
    /// normalizer, cache/timestep mismatch).
    #[error("state error: {0}")]
    State(String),

    /// Non-finite value encountered during numeric work.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Checkpoint file is malformed or incompatible with the model.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
