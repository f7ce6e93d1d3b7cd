use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied inconsistent shapes, out-of-range counts, or malformed input.
    #[error("usage error: {0}")]
    Usage(String),

    /// A parameter chain violated one of its theoretical preconditions.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The Gram pseudo-solve could not reach the residual tolerance.
    #[error("ill-conditioned gradient step: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    IllConditioned { residual: f64, tolerance: f64 },

    /// A non-finite iterate or objective value appeared.
    #[error("numerical failure at iteration {iteration}: {what}")]
    NumericalFailure { iteration: u64, what: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::IllConditioned { .. } | Error::NumericalFailure { .. } => 3,
            Error::Io { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
