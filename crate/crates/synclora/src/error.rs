use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value is outside the supported domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The operation does not apply to the current state (e.g. asking for a
    /// guess when every frame is already decoded).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A device's agreement bitmap contradicts symbols that are already
    /// pinned down. With truthful replies this cannot happen; it flags a
    /// corrupted or mismatched bitmap.
    #[error("inconsistent bitmap: {0}")]
    InconsistentBitmap(String),

    /// The schedule ran past the last available slot.
    #[error("simulation horizon exceeded: needed t = {t:.6} s but the last slot starts at {horizon:.6} s")]
    HorizonExceeded { t: f64, horizon: f64 },

    /// An internal invariant was violated; always a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid_arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
