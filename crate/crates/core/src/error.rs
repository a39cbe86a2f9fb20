use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unstable configuration: {0}")]
    Unstable(String),

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("ownership error: {0}")]
    Ownership(String),

    #[error("measurement error: {0}")]
    Measurement(String),

    #[error("numerical abort at step {step}, cell {cell:?}: {reason}")]
    NumericalAbort {
        step: u64,
        cell: [usize; 3],
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NumericalAbort { .. } => 3,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}
