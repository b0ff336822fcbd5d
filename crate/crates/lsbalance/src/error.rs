//! Crate-wide error type.

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid argument or precondition failure.
    #[error("input error: {0}")]
    Input(String),

    /// A point had the wrong number of coordinates.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A parameter value outside the supported set (e.g. a Matérn smoothness
    /// without a closed form).
    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    /// Factorization or other numerical failure; carries the condition
    /// diagnostic of the offending matrix.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A discrete domain ran out of admissible points.
    #[error("domain exhausted: no admissible points remain")]
    ExhaustedDomain,

    /// An internal invariant or runtime lemma assertion was violated.
    /// The message contains the full diagnostic.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// Bad experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed data file.
    #[error("data error (line {line}): {message}")]
    Data { line: usize, message: String },

    /// Filesystem failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    /// An objective query failed; wraps the underlying error with the
    /// iteration at which it happened.
    #[error("query failed at iteration {t}: {source}")]
    Query {
        t: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
