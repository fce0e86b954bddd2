use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} qubits, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid Pauli string {0:?}")]
    InvalidPauli(String),

    #[error("axes commute; i*P*Q is not Hermitian")]
    CommutingAxes,

    #[error("unsupported rotation angle {num}/{den} pi")]
    UnsupportedAngle { num: i64, den: u32 },

    #[error("rotation is not a pi/8 rotation")]
    NotPi8,

    #[error("invalid layering: {0}")]
    InvalidLayering(String),

    #[error("layer index {index} out of range for {len} layers")]
    LayerIndex { index: usize, len: usize },

    #[error("invalid merge set: {0}")]
    InvalidMerge(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("unknown protocol {0:?}")]
    UnknownProtocol(String),

    #[error("search guard exceeded: {0}")]
    Guard(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid code: {0}")]
    InvalidCode(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
