use crate::config::ConfigErrors;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] chainlab::Error),
    #[error("non-finite value in {output}, line {line}")]
    NonFinite { output: String, line: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for bad input, 3 for numerical failure, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                chainlab::Error::Config(_) | chainlab::Error::Unsupported(_) => 2,
                chainlab::Error::Io(_) => 1,
                _ => 3,
            },
            CliError::NonFinite { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}
