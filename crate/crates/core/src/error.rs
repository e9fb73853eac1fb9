use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the simulator, analysis pipeline and CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input arity mismatch: expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },

    #[error("invalid genome: {0}")]
    InvalidGenome(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    ConfigParse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("unknown configuration key `{key}`; valid keys are: {valid}")]
    UnknownKey { key: String, valid: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("missing column `{column}` in {path}")]
    MissingColumn { column: String, path: String },

    #[error("malformed record in {path}:{line}: {message}")]
    Malformed {
        path: String,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
