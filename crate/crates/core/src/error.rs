use thiserror::Error;

/// Errors raised by palette operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("color {color} out of range for a palette on {color_count} colors")]
    ColorOutOfRange { color: u32, color_count: usize },

    #[error("vertex {vertex} out of range for a 3-graph on {vertex_count} vertices")]
    VertexOutOfRange { vertex: u32, vertex_count: usize },

    #[error("edge {0:?} does not have three distinct vertices")]
    BadEdge([u32; 3]),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("{what} supports at most {limit} colors, got {got}")]
    TooLarge {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("enumeration of {count} candidates exceeds the limit {limit}")]
    EnumerationTooLarge { count: u128, limit: u128 },

    #[error("invalid weight vector: {0}")]
    InvalidWeights(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("slices disagree on triple {triple:?}")]
    SliceDisagreement { triple: [u32; 3] },

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
