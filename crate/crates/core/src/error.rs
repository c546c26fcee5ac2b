use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for {n} nodes")]
    Range { index: usize, n: usize },

    #[error("node {node} labeled both `{first}` and `{second}`")]
    LabelConflict {
        node: usize,
        first: String,
        second: String,
    },

    #[error("no labels")]
    NoLabels,

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("all optimizer runs failed: {}", .0.join("; "))]
    OptimizerFailed(Vec<String>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Domain(_) => "domain",
            Error::Range { .. } => "range",
            Error::LabelConflict { .. } => "label-conflict",
            Error::NoLabels => "no-labels",
            Error::Numeric(_) => "numeric",
            Error::OptimizerFailed(_) => "optimizer-failed",
            Error::Io { .. } => "io",
        }
    }

    /// True for failures caused by corrupted numerics rather than bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_) | Error::OptimizerFailed(_))
    }
}
