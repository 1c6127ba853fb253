use thiserror::Error;

/// Every failure the simulator can report.
///
/// Attack effects never surface here: forged inputs produce FAIL verdicts
/// in the ledger. These variants are for misuse, ordering violations and
/// resource limits.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("register of {needed} amplitudes exceeds the cap of {cap}")]
    Resource { needed: u128, cap: usize },

    #[error("ordering error: {0}")]
    Ordering(String),

    #[error("incomplete input: {0}")]
    IncompleteInput(String),

    #[error("protocol violation: {0}")]
    ProtocolViolation(String),

    #[error("configuration error: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn ordering(msg: impl Into<String>) -> Self {
        Error::Ordering(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
