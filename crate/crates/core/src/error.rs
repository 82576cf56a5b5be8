use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("segment has no readings")]
    EmptySegment,

    #[error("no valid rows in input {0}")]
    EmptyInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot stratify: class `{class}` has {count} segments but {k} folds were requested")]
    Stratification { class: String, count: usize, k: usize },

    #[error("training data error: {0}")]
    TrainingData(String),

    #[error("model file error: {0}")]
    ModelFile(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for errors caused by user input (files, configs, data) rather than
    /// a broken internal invariant.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::EmptyInput(_)
                | Error::Config(_)
                | Error::Stratification { .. }
                | Error::TrainingData(_)
                | Error::ModelFile(_)
                | Error::Parse { .. }
                | Error::Io { .. }
                | Error::EmptySegment
        )
    }
}
