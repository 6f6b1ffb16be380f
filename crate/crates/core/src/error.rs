use thiserror::Error;

/// Errors raised by the library layer.
///
/// Every variant carries a short machine-readable reason via [`KickedError::reason`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum KickedError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("numerical guard tripped: {0}")]
    NumericalGuard(String),
    #[error("element admits a time-reversing symmetry in the group (conjugator word {word}); homogeneous quasi-morphisms vanish on it")]
    TimeReversingSymmetry { word: String },
}

impl KickedError {
    pub fn reason(&self) -> &'static str {
        match self {
            KickedError::InvalidInput(_) => "invalid_input",
            KickedError::Unsupported(_) => "unsupported",
            KickedError::Configuration(_) => "configuration",
            KickedError::Degenerate(_) => "degenerate",
            KickedError::NumericalGuard(_) => "numerical_guard",
            KickedError::TimeReversingSymmetry { .. } => "time_reversing_symmetry",
        }
    }
}

pub type Result<T> = std::result::Result<T, KickedError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(KickedError::InvalidInput(msg.into()))
}
