use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operator is not Hermitian")]
    NotHermitian,

    #[error("product vector has a zero factor (party {party})")]
    DegenerateVector { party: usize },

    #[error("local operator for party {party} is singular")]
    SingularLocalOp { party: usize },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("exact-kind input required")]
    ExactKindRequired,

    #[error("malformed matrix: {0}")]
    Malformed(String),

    #[error("state is not G-invariant")]
    NotGInvariant,

    #[error("state is not positive semidefinite")]
    NotPsd,

    #[error("state is not PPT")]
    NotPpt,

    #[error("numerical failure: {reason} (residual {residual:.3e})")]
    NumericalFailure { reason: String, residual: f64 },

    #[error("block {index} is singular")]
    SingularBlock { index: usize },

    #[error("shape is not doubled: party {party} has odd dimension {dim}")]
    NotDoubled { party: usize, dim: usize },

    #[error("coordinate overflow while building an integer Jacobian")]
    Overflow,

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
