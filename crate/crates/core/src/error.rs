use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the segmentation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid snapshot: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no retained element in page")]
    EmptyPage,

    #[error("degenerate page: relevant area is zero")]
    DegeneratePage,

    #[error("empty ground truth")]
    EmptyGroundTruth,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
