use thiserror::Error;

/// Errors raised by the analysis layer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("cyclotomic modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("amplitude field Q(zeta_{got}) does not contain Q(zeta_{needed})")]
    FieldMismatch { needed: u64, got: u64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A decider or search declined because its hypotheses do not hold.
    /// `reason` is a stable machine-readable token.
    #[error("refused ({reason}): {detail}")]
    Refused { reason: &'static str, detail: String },

    #[error("parse error at column {column}: {message}")]
    Parse { column: usize, message: String },

    /// Two deciders disagreed; always a defect.
    #[error("inconsistent results: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn refused(reason: &'static str, detail: impl Into<String>) -> Self {
        Error::Refused {
            reason,
            detail: detail.into(),
        }
    }

    /// True for errors that mean "hypotheses not met" rather than a fault.
    pub fn is_refusal(&self) -> bool {
        matches!(
            self,
            Error::Refused { .. }
                | Error::Parse { .. }
                | Error::IndexOutOfRange { .. }
                | Error::InvalidState(_)
                | Error::InvalidArgument(_)
                | Error::FieldMismatch { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
