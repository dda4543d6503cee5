//! Error type shared across the crate.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by loading, building, querying and evaluating.
#[derive(Debug, Error)]
pub enum Error {
    /// File could not be read or written.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A line of an input file did not match its expected format.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Dictionary contained no usable entities.
    #[error("dictionary is empty after filtering blank and duplicate lines")]
    EmptyDictionary,

    /// N-gram model order must be at least 1.
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),

    /// A queried n-gram has a length outside 1..=order.
    #[error("n-gram length {len} outside 1..={order}")]
    NgramLength { len: usize, order: usize },

    /// Building or ingesting produced a model with no n-grams at all.
    #[error("corpus produced an empty n-gram model")]
    EmptyModel,

    /// Word has no vector in the embedding store.
    #[error("word not in embedding vocabulary: {0:?}")]
    OutOfVocabulary(String),

    /// A stored embedding vector has zero norm, so cosine is undefined.
    #[error("zero-norm embedding vector for {0:?}")]
    DegenerateVector(String),

    /// A configuration value is outside its allowed range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// ROC analysis needs at least one Y and one N item.
    #[error("labelled scores contain a single class; ROC needs both Y and N")]
    SingleClass,
}

impl Error {
    /// An I/O failure tagged with the path involved.
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// A format failure tagged with the path and 1-based line number.
    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// True for filesystem failures, as opposed to validation and format errors.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
