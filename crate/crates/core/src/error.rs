use thiserror::Error;

/// Errors raised by graph construction, the oracle, the simulator and the
/// protocols.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} supports at most {limit} vertices, got {n}")]
    CapacityExceeded { what: &'static str, limit: usize, n: usize },

    #[error("congestion violation in round {round}: vertex {vertex} port {port} sent {bits} bits (budget {budget})")]
    Congestion {
        round: usize,
        vertex: usize,
        port: usize,
        bits: usize,
        budget: usize,
    },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("malformed message: {0}")]
    Decode(String),
}

pub type Result<T> = std::result::Result<T, Error>;
