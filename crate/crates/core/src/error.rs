use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("series `{label}` is too short: {len} values, need at least {min}")]
    TooShort { label: String, len: usize, min: usize },

    #[error("series `{label}` contains a non-finite value at index {index}")]
    NonFinite { label: String, index: usize },

    #[error("series `{0}` has zero variance")]
    ZeroVariance(String),

    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("series of length {len} is too short for window {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown lag schedule {0}; expected 1..=4")]
    UnknownSchedule(u8),

    #[error("no overlapping pairs remain after synchronization")]
    EmptyOverlap,

    #[error("regressor is constant or has fewer than 3 observations")]
    DegenerateRegressor,

    #[error("partition function underflowed on anti-diagonal {0}")]
    NumericalUnderflow(usize),

    #[error("pair ({0}, {1}) failed: {2}")]
    InvalidPair(String, String, Box<Error>),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("timestamps are not strictly increasing at row {line} of {path}")]
    NonMonotoneTimestamps { path: PathBuf, line: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status for the command-line tool: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) | Error::UnknownSchedule(_) => 1,
            Error::ZeroNorm | Error::ZeroVariance(_) | Error::DegenerateRegressor | Error::NumericalUnderflow(_) => 3,
            Error::InvalidPair(_, _, inner) => inner.exit_code(),
            _ => 2,
        }
    }
}
