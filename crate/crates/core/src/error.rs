use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at row {row}{}: {message}", .column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse {
        row: usize,
        column: Option<usize>,
        message: String,
    },

    #[error("invalid input: {0}")]
    Validation(String),

    /// The (shrunk) pooled covariance could not be factorized.
    #[error("singular covariance matrix: {0}")]
    Singular(String),

    #[error("refusing to enumerate 2^{n} subsets (guard is n <= {guard})")]
    EnumerationGuard { n: usize, guard: usize },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input rather than a failure while running.
    pub fn is_usage(&self) -> bool {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::EnumerationGuard { .. } => true,
            Error::Step { source, .. } => source.is_usage(),
            Error::Singular(_) | Error::Io { .. } | Error::Csv(_) => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
