use std::path::PathBuf;

use thiserror::Error;

pub type AppResult<T> = Result<T, AppError>;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] permsmc_core::Error),
    #[error("{path}: {source}")]
    Matrix {
        path: PathBuf,
        source: permsmc_core::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error("malformed runs file {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

impl AppError {
    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    /// 3 for size-guard violations, 1 for output failures, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Core(e) | Self::Matrix { source: e, .. } if e.is_guard() => 3,
            Self::Write { .. } => 1,
            _ => 2,
        }
    }
}
