//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by knowledge-graph, decoder, training and file operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A concept, predicate or time index fell outside the vocabulary or tensor shape.
    #[error("invalid index: {0}")]
    InvalidIndex(String),

    /// A temporal history with zero time instances cannot be averaged.
    #[error("empty history: temporal graph has no time instances")]
    EmptyHistory,

    /// A categorical distribution was requested over an empty support.
    #[error("empty support: {0}")]
    EmptySupport(String),

    /// Conditioning on a value whose marginal probability is zero.
    #[error("unsupported condition: {0}")]
    UnsupportedCondition(String),

    /// Vector or matrix dimensions do not line up.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// An episodic engram was requested but is not in the store.
    #[error("missing engram: {0}")]
    MissingEngram(String),

    /// Refusal to overwrite an episodic engram that already exists.
    #[error("overwrite refused: episode already stored for time {0}")]
    DuplicateEpisode(u32),

    /// A requested zero-shot split cannot be satisfied by the vocabulary.
    #[error("infeasible split: {0}")]
    InfeasibleSplit(String),

    /// A configuration value is out of range or inconsistent.
    #[error("config error: {0}")]
    Config(String),

    /// Training or gradient evaluation produced a non-finite value.
    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    /// A metric was requested on data it does not apply to.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// A text or binary input file violated its format.
    #[error("parse error in {file}:{line} field {field}: {message}")]
    Parse {
        file: String,
        line: usize,
        field: String,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn parse(
        file: impl Into<String>,
        line: usize,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            file: file.into(),
            line,
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
