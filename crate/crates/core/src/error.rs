use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid bound parameters: {0}")]
    InvalidBound(String),

    #[error("density is undefined at eps = 1; use the point mass accessor")]
    DensityAtAtom,

    #[error("{name} must lie in (0, 1), got {value}")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("fixed-point iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("slot count mismatch: {0} vs {1}")]
    SlotMismatch(usize, usize),

    #[error("bit vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("enumeration over 2^{0} assignments is not supported (n <= {max})", max = crate::learners::MAX_ENUMERATE_VARS)]
    TooManyVariables(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("loss {0} outside [0, 1]")]
    LossOutOfRange(f64),

    #[error("records must be strictly increasing in m (got {prev} then {next})")]
    UnsortedRecords { prev: u64, next: u64 },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
