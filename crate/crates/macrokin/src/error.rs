use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {reason}")]
    File { path: PathBuf, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown suite {name:?}; valid suites: {valid}")]
    UnknownSuite { name: String, valid: String },
    #[error("{0}")]
    Runtime(String),
    #[error("every replica hit the event cap ({replicas} replicas)")]
    AllTruncated { replicas: u64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::AllTruncated { .. } => 2,
            _ => 1,
        }
    }

    pub fn file(path: impl Into<PathBuf>, reason: impl ToString) -> Self {
        CliError::File {
            path: path.into(),
            reason: reason.to_string(),
        }
    }

    pub fn config(reason: impl ToString) -> Self {
        CliError::Config(reason.to_string())
    }

    pub fn runtime(reason: impl ToString) -> Self {
        CliError::Runtime(reason.to_string())
    }
}
