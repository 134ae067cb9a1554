use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("node {node} out of range for a graph of {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("invalid network: {0}")]
    Network(String),
    #[error("invalid circuit: {0}")]
    Circuit(String),
    #[error("input has {got} bits, circuit width is {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("not a permutation: {0}")]
    NotPermutation(String),
    #[error("index {index} out of range for {len} entries")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("{width} qubits exceeds the simulator cap of {cap}")]
    TooManyQubits { width: usize, cap: usize },
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("promise violated: {0}")]
    PromiseViolation(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
