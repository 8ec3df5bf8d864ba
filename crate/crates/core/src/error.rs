use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),

    #[error("basis word {word} out of range for {n_qubits} qubits")]
    WordOutOfRange { word: usize, n_qubits: usize },

    #[error("{n_qubits} qubits exceeds the dense-matrix cap of {cap}")]
    DenseCapExceeded { n_qubits: usize, cap: usize },

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: String, limit: String },

    #[error("invalid code: {0}")]
    InvalidCode(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("non-finite value at step {step}: {what}")]
    NonFinite { step: usize, what: String },

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("missing measurement data for basis {0}")]
    MissingBasis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
