use std::path::PathBuf;

use sentigraph_core::{ConvNetError, EmbedError, EvalError, TextGraphError};
use thiserror::Error;

use crate::dataset::DatasetError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("model was trained against vocabulary {expected}, got {found}")]
    VocabularyMismatch { expected: String, found: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("graph stage: {0}")]
    Graph(#[from] TextGraphError),
    #[error("embedding stage: {0}")]
    Embed(#[from] EmbedError),
    #[error("classifier stage: {0}")]
    Classifier(#[from] ConvNetError),
    #[error("evaluation stage: {0}")]
    Eval(#[from] EvalError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: path.into(), line, message: message.into() }
    }

    /// Process exit status: 1 for bad input configuration, 2 for failures
    /// while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            _ => 2,
        }
    }
}
