use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A text input line could not be parsed. Lines are 1-based.
    #[error("{file}: line {line}: {msg}")]
    Parse {
        file: &'static str,
        line: usize,
        msg: String,
    },

    #[error("dangling reference: {0}")]
    Reference(String),

    #[error("scene model has no images")]
    EmptyModel,

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated input: header declares {expected} {element} rows, found {found}")]
    Truncated {
        element: String,
        expected: usize,
        found: usize,
    },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("insufficient views: need {needed}, have {available}")]
    InsufficientViews { needed: usize, available: usize },

    #[error("no cluster could be formed: {0}")]
    EmptyResult(String),

    #[error("degenerate plane fit: {0}")]
    DegenerateFit(String),

    #[error("requested zero poses")]
    EmptyRequest,

    #[error("could not place {requested} non-overlapping buildings after {attempts} attempts")]
    Placement { requested: usize, attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(file: &'static str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            file,
            line,
            msg: msg.into(),
        }
    }
}
