use num_bigint::BigInt;

/// Error type shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A stated precondition does not hold for the given inputs.
    #[error("precondition not met: {0}")]
    Precondition(String),

    /// A time index lies beyond the built schedule horizon.
    #[error("index {index} is outside the built horizon {horizon}; extend the level count")]
    Horizon { index: BigInt, horizon: BigInt },

    /// An internal schedule constraint was violated (or a loaded file does
    /// not satisfy the constraints and is rejected).
    #[error("schedule constraint violated: {0}")]
    Constraint(String),

    /// Certificates are only issued from uncapped schedules.
    #[error("operation requires an uncapped schedule; this one is capped")]
    CappedSchedule,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }
}
