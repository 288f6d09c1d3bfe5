use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },

    #[error("absolute continuity violated at index {index}: p > 0 where the baseline is 0")]
    AbsoluteContinuity { index: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid alpha order: {0}")]
    InvalidAlpha(String),

    #[error("identifier out of range: {0}")]
    OutOfRange(String),

    #[error("edge record {record}: {message}")]
    TypeMismatch { record: usize, message: String },

    #[error("vertex {vertex} of type `{vertex_type}` has no outgoing edge in `{edge_type}`; add sink vertices to make the network walkable")]
    Walkability {
        edge_type: String,
        vertex_type: String,
        vertex: u32,
    },

    #[error("meta path step {step} does not chain: expected source type `{expected}`, found `{found}`")]
    Chaining {
        step: usize,
        expected: String,
        found: String,
    },

    #[error("path count overflow while projecting meta path")]
    Overflow,

    #[error("conditioning on a vertex with zero probability: {0}")]
    ZeroProbability(String),

    #[error("{context}: line {line}: {message}")]
    Parse {
        context: String,
        line: u64,
        message: String,
    },

    #[error("meta path expression at offset {offset}: {message}")]
    MetaPathExpr { offset: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the underlying file system rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
