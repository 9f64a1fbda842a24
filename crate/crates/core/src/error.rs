use thiserror::Error;

/// Errors raised by the polarizability machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("not implemented for {0}")]
    NotImplemented(String),

    #[error("degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("no convergence after {iterations} iterations: {detail}")]
    NoConvergence { iterations: usize, detail: String },

    #[error("field amplitude {field} destabilizes the state: {detail}")]
    UnstableField { field: f64, detail: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("incomplete record {record}: {detail}")]
    IncompleteRecord { record: String, detail: String },

    #[error("invalid record {record}: {detail}")]
    InvalidRecord { record: String, detail: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerical machinery, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence { .. } | Error::UnstableField { .. } | Error::Degenerate(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
