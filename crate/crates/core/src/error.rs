use thiserror::Error;

/// Errors surfaced by the simulation and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-unitary gate (deviation {0:.3e})")]
    NonUnitary(f64),
    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    IndexOutOfRange { index: usize, num_qubits: usize },
    #[error("duplicate qubit indices")]
    DuplicateIndices,
    #[error("impossible outcome: projecting a zero-norm branch")]
    ImpossibleOutcome,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("dimension must be a power of two >= 2, got {0}")]
    NotPowerOfTwo(usize),
    #[error("vector is not normalized (|norm^2 - 1| = {0:.3e})")]
    NotNormalized(f64),
    #[error("all-zero vector")]
    ZeroVector,
    #[error("state is not a label encoding state: {0}")]
    NotALabelState(String),
    #[error("nonpositive norm")]
    NonpositiveNorm,
    #[error("zero success probability")]
    ZeroSuccessProbability,
    #[error("retry cap of {cap} charged steps exceeded (t_stp = {t_stp})")]
    RetryCapExceeded { cap: u64, t_stp: u64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
