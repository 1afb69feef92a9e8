use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
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
    #[error("malformed JSON in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("cannot start the worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Core(#[from] qnoise_core::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for numerical failures, 1 for everything
    /// else (I/O on the output side, thread pool).
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            CliError::Core(_) | CliError::Config(_) | CliError::Read { .. } | CliError::Json { .. } => 2,
            CliError::Write { .. } | CliError::Pool(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Read { .. } => "read",
            CliError::Write { .. } => "write",
            CliError::Json { .. } => "json",
            CliError::Pool(_) => "thread_pool",
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "validation",
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
