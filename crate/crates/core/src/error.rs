use thiserror::Error;

/// Errors raised by the decoder library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid Pauli string character {0:?}")]
    ParsePauli(char),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("invalid lattice size {0}: {1}")]
    LatticeSize(usize, &'static str),

    #[error("invalid syndrome: {0}")]
    Syndrome(String),

    #[error("operator has a non-trivial syndrome")]
    NotSyndromeFree,

    #[error("probability {0} outside [0, 1]")]
    Probability(f64),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("instance too large for exhaustive summation: {0}")]
    TooLarge(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
