use thiserror::Error;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("no interior stationary point (discriminant {discriminant:e})")]
    NoInteriorStationaryPoint { discriminant: f64 },

    #[error("no bracket found on [{lo:e}, {hi:e}]")]
    BracketNotFound { lo: f64, hi: f64 },

    #[error("unknown scheme `{0}`")]
    UnknownScheme(String),

    #[error("target unreachable: {0}")]
    TargetUnreachable(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
