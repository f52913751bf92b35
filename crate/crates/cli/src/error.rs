use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}:{line}:{column}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Validation { path: PathBuf, message: String },

    #[error("{0}")]
    Budget(String),

    #[error("{0}")]
    Misuse(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse { .. } => 3,
            CliError::Validation { .. } => 4,
            CliError::Budget(_) => 5,
            CliError::Misuse(_) => 6,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, e: serde_json::Error) -> Self {
        CliError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl From<halp::Error> for CliError {
    fn from(e: halp::Error) -> Self {
        use halp::Error as E;
        match e {
            E::BudgetExceeded { .. } | E::TooLarge(_) | E::Numerical(_) | E::Infeasible | E::Unbounded => {
                CliError::Budget(e.to_string())
            }
            E::InvalidModel(_) | E::Domain(_) => CliError::Validation {
                path: PathBuf::from("<model>"),
                message: e.to_string(),
            },
            E::Misuse(_) | E::Json(_) => CliError::Misuse(e.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
