use thiserror::Error;

/// Errors raised by the simulation and solver layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        diagnostics: String,
    },
    #[error("blow-up in cell {cell} at t = {time}: {reason}")]
    BlowUp {
        cell: usize,
        time: f64,
        reason: String,
    },
    #[error("estimation error: {0}")]
    Estimation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, diagnostics: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            diagnostics: diagnostics.into(),
        }
    }

    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical { .. } | Error::BlowUp { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
