use kicked_core::KickedError;
use thiserror::Error;

/// Everything a run can fail with, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical guard tripped: {0}")]
    Guard(String),
    #[error(transparent)]
    Library(#[from] KickedError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("replay mismatch: {0}")]
    Replay(String),
}

impl CliError {
    /// 2 for anything the caller can fix in the configuration, 3 for numerical
    /// guards, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Guard(_) | CliError::Replay(_) => 3,
            CliError::Io(_) => 1,
            CliError::Library(e) => match e {
                KickedError::NumericalGuard(_) | KickedError::Degenerate(_) => 3,
                _ => 2,
            },
        }
    }

    pub fn reason(&self) -> &'static str {
        match self {
            CliError::Config(_) => "configuration",
            CliError::Guard(_) => "numerical_guard",
            CliError::Library(e) => e.reason(),
            CliError::Io(_) => "io",
            CliError::Replay(_) => "replay_mismatch",
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}
