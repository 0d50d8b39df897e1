use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot parse Pauli word {text:?}: {reason}")]
    PauliParse { text: String, reason: String },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("invalid edge ({0}, {1}): endpoints must be distinct")]
    DegenerateEdge(usize, usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("{n_qubits} qubits exceeds the cap of {cap}")]
    Capacity { n_qubits: usize, cap: usize },

    #[error("parameter shape mismatch: circuit wants {expected} angles, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("unknown {what} {name:?}")]
    UnknownName { what: &'static str, name: String },

    #[error("malformed observable file {path}: {reason}")]
    ObservableFile { path: PathBuf, reason: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("training diverged at iteration {iter}: cost is {cost}")]
    Diverged { iter: usize, cost: f64 },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
