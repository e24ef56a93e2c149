use thiserror::Error;

/// Errors raised by model construction, enumeration, estimation and fitting.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("tail exponent alpha = {0} is outside (1, 2]")]
    InvalidAlpha(f64),

    #[error("binary length is undefined for 0")]
    ZeroBinaryLength,

    #[error("digit index {k} out of range 1..={len} for {n}")]
    DigitOutOfRange { n: u64, k: u64, len: u64 },

    #[error("level {0} is invalid; levels start at 2")]
    InvalidLevel(u64),

    #[error("state ({level}, {phase}) is not a state of the {kind} process")]
    InvalidState {
        kind: &'static str,
        level: u64,
        phase: u64,
    },

    #[error("symbol {symbol} is not in the alphabet of size {alphabet}")]
    InvalidSymbol { symbol: u8, alphabet: u8 },

    #[error("block length {0} is outside the supported range 1..=64")]
    InvalidBlockLength(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("entry budget exceeded: the table would hold more than {budget} entries")]
    EntryBudgetExceeded { budget: usize },

    #[error("path budget exceeded: more than {budget} path extensions required")]
    PathBudgetExceeded { budget: u64 },

    #[error("label disagreement: past gives {past}, future gives {future}")]
    LabelDisagreement { past: u64, future: u64 },

    #[error("insufficient data: need at least {required} symbols, got {available}")]
    InsufficientData { required: usize, available: usize },

    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(String),

    #[error("malformed table cache: {0}")]
    Cache(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
