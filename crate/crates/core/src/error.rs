use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node index {index} on line {line} does not fit in a 32-bit node id")]
    IndexOverflow { line: usize, index: u64 },

    #[error("binary graph: {0}")]
    BinaryFormat(String),

    #[error("graph is empty")]
    EmptyGraph,

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("no realization results to aggregate")]
    EmptyStream,

    #[error("no samples")]
    EmptySamples,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed}, got {got}")]
    TooFew { needed: usize, got: usize },

    #[error("{0} has zero variance")]
    ZeroVariance(&'static str),

    #[error("unresolved titles: {}", .0.join(", "))]
    UnresolvedTitles(Vec<String>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
