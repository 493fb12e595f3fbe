use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A non-finite value appeared in the forward or backward pass.
    #[error("numerical overflow at layer {layer}: {what}")]
    Overflow { layer: usize, what: String },

    /// Rejection sampling could not satisfy the separation threshold.
    #[error("dataset infeasible: best separation {achieved:.6e} exceeds threshold {threshold:.6e} after {attempts} attempts")]
    Infeasible {
        achieved: f64,
        threshold: f64,
        attempts: usize,
    },

    #[error("refused: {0}")]
    Refused(String),

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
