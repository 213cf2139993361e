//! Error type shared by all subsystems.

use std::path::PathBuf;
use thiserror::Error;

/// Crate-wide error. The variants mirror the contract language used across
/// the library: argument/contract violations, malformed input data, window or
/// index ranges, missing prerequisite state, numeric breakdowns, and I/O.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("state error: {0}")]
    State(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CoreError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CoreError::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefix the message with extra context (trial index, component, ...)
    /// while keeping the error kind.
    pub fn with_context(self, ctx: &str) -> Self {
        match self {
            CoreError::Argument(m) => CoreError::Argument(format!("{ctx}: {m}")),
            CoreError::Format(m) => CoreError::Format(format!("{ctx}: {m}")),
            CoreError::Range(m) => CoreError::Range(format!("{ctx}: {m}")),
            CoreError::State(m) => CoreError::State(format!("{ctx}: {m}")),
            CoreError::Numeric(m) => CoreError::Numeric(format!("{ctx}: {m}")),
            io @ CoreError::Io { .. } => io,
        }
    }
}

pub type Result<T> = std::result::Result<T, CoreError>;
