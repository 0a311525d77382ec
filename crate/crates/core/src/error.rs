use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },

    #[error("duplicate id `{0}`")]
    DuplicateId(String),

    #[error("no feature vector for id `{0}`")]
    MissingFeature(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("count mismatch: {ids} ids but {vectors} vectors")]
    CountMismatch { ids: usize, vectors: usize },

    #[error("vocabulary is empty after applying min_count={min_count}")]
    EmptyVocabulary { min_count: u64 },

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no token of the document is in the vocabulary")]
    AllOutOfVocabulary,

    #[error("word `{0}` is out of vocabulary")]
    OutOfVocabulary(String),

    #[error("aggregation `{aggregation}` is not supported by {method}")]
    UnsupportedAggregation {
        method: &'static str,
        aggregation: &'static str,
    },

    #[error("zero-norm vector{}", .0.as_deref().map(|id| format!(" for id `{id}`")).unwrap_or_default())]
    ZeroVector(Option<String>),

    #[error("index is empty")]
    EmptyIndex,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid {kind} file: {message}")]
    Format { kind: &'static str, message: String },

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("{0}")]
    Evaluation(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn format(kind: &'static str, msg: impl Into<String>) -> Self {
        Error::Format {
            kind,
            message: msg.into(),
        }
    }
}
