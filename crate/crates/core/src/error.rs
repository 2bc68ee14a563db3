use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),
    #[error("digit {digit} is out of range for modulus {m}")]
    DigitOutOfRange { digit: u64, m: u32 },
    #[error("digit set must be nonempty")]
    EmptyDigitSet,
    #[error("progression length must be at least 3, got {0}")]
    InvalidLength(usize),
    #[error("digit sets have different moduli ({0} vs {1})")]
    ModulusMismatch(u32, u32),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not invertible")]
    NotInvertible,
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),
    #[error("|D| = {size} does not divide n = {n}")]
    Divisibility { size: usize, n: usize },
    #[error("enumeration would visit {count} points, above the cap of {cap}")]
    CapExceeded { count: String, cap: u64 },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("linear program failed: {0}")]
    Lp(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
