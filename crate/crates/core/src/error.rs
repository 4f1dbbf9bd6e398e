//! Crate-wide error type.

use std::path::PathBuf;

/// Errors surfaced by corpus IO, validation, training, and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed json in {path} line {line}: {message}")]
    Json {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A structural or lexicon-level corpus invariant does not hold.
    #[error("invalid corpus record (doc {doc_id}, sentence {sent_id}): {rule}")]
    CorpusValidation {
        doc_id: String,
        sent_id: String,
        rule: String,
    },

    #[error("invalid lexicon: {0}")]
    Lexicon(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("training error: {0}")]
    Train(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("experiment error: {0}")]
    Experiment(String),
}

impl Error {
    /// Wraps an IO error with the path it occurred on.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
