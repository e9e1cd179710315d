use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid block shape: {0}")]
    InvalidShape(String),

    #[error("zero padding violated: trailing sample {index} is nonzero (nu = {nu})")]
    PaddingViolation { index: usize, nu: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("duplicate frequency index {0}")]
    DuplicateIndex(usize),

    #[error("frequency index {index} out of range for block length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("expected {expected} frequency indices, got {got}")]
    WrongSubsetSize { expected: usize, got: usize },

    #[error("subset enumeration too large: C({n}, {k}) = {count} exceeds {limit}")]
    EnumerationTooLarge {
        n: usize,
        k: usize,
        count: u128,
        limit: u128,
    },

    #[error("constellation size {0} is not a power of two (>= 2)")]
    NotPowerOfTwo(usize),

    #[error("symbol index {index} out of range for constellation of size {size}")]
    SymbolOutOfRange { index: usize, size: usize },

    #[error("power split violated: beta = {beta} must exceed the high-layer rate exponent {r_tilde_h}")]
    PowerSplit { beta: f64, r_tilde_h: f64 },

    #[error("invalid layer configuration: {0}")]
    InvalidLayer(String),

    #[error("search budget exceeded: {candidates} candidate blocks > budget {budget}")]
    BudgetExceeded { candidates: u128, budget: u64 },

    #[error("rate out of range: r_H + r_L = {total} exceeds N/(N+nu) = {limit}")]
    RateOutOfRange { total: f64, limit: f64 },

    #[error("insufficient data for slope fit: {0}")]
    InsufficientData(String),

    #[error("invalid sweep configuration: {0}")]
    InvalidConfig(String),

    #[error("curve CSV is missing columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),

    #[error("SNR grids differ between curves")]
    GridMismatch,

    #[error("curve I/O: {0}")]
    Io(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
