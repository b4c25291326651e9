use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the indexing pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read corpus directory {path}: {source}")]
    CorpusDir {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("all documents are empty after preprocessing; nothing to index")]
    EmptyCorpus,

    #[error("corpus must contain at least {needed} documents, got {got}")]
    TooFewDocuments { needed: usize, got: usize },

    #[error("number of topics must be at least 1, got {0}")]
    InvalidTopicCount(i64),

    #[error("matrix has no nonzero singular values; cannot fit a semantic model")]
    ZeroMatrix,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown node id {0}")]
    UnknownNode(u32),

    #[error("hierarchy exceeded {0} levels without converging to a root")]
    TooManyLevels(u32),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid index file: {0}")]
    IndexFormat(String),

    #[error("{0}")]
    Invalid(String),
}
