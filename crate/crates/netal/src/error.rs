use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Problems with user-supplied input files or flags.
#[derive(Debug, Error)]
pub enum InputError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("label file names unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("vertex {0:?} has no label")]
    MissingLabel(String),
    #[error("vertex {0:?} is labeled twice")]
    DuplicateLabel(String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] netal_core::Error),
}

/// Top-level command failure, split by exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }

    pub fn input(e: impl std::fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e.to_string())
    }
}
