use thiserror::Error;

/// Errors surfaced by sketch construction, hashing, and file parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("position {position} out of range for dimension {dimension}")]
    PositionOutOfRange { position: usize, dimension: usize },

    #[error("duplicate position {0}")]
    DuplicatePosition(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("schedule mismatch between sketch and isolation matrix")]
    ScheduleMismatch,

    #[error("index out of range: pass {pass}, trial {trial}")]
    IndexOutOfRange { pass: usize, trial: usize },

    /// Rejection sampling exhausted every repetition for some position
    /// (pass, trial) identifies the failing hash seed.
    #[error("hash construction failed at pass {pass}, trial {trial}")]
    HashFail { pass: usize, trial: usize },

    #[error("polynomial divisor must be monic")]
    NonMonicDivisor,

    #[error("malformed {what}: {detail}")]
    Format { what: &'static str, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn format(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Format {
            what,
            detail: detail.into(),
        }
    }
}
