use std::path::PathBuf;

use qubit_pbn::Error as CoreError;

/// Failures of a run, each with its process exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("malformed configuration: {0}")]
    Malformed(String),
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
    #[error("invalid input: {0}")]
    Invariant(String),
    #[error("infeasible request: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Core(CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Malformed(_) | CliError::Read { .. } => 2,
            CliError::Invariant(_) => 3,
            CliError::Infeasible(_) => 4,
            CliError::Write { .. } => 1,
            CliError::Core(e) => {
                if e.is_invariant_violation() {
                    3
                } else if matches!(e, CoreError::TooLarge { .. } | CoreError::ClosureOverflow { .. }) {
                    4
                } else {
                    2
                }
            }
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
