use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("{0}")]
    Domain(String),

    #[error("invalid drill config: {0}")]
    Config(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("challenge error: {0}")]
    Challenge(String),

    #[error("invalid answer: {0}")]
    Validation(String),

    #[error("session log line {line}: {message}")]
    Persistence { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code used by the HTTP API and the C ABI.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse_error",
            Error::Domain(msg) if msg.starts_with("unsupported multiplier") => {
                "unsupported_multiplier"
            }
            Error::Domain(_) => "domain_error",
            Error::Config(_) => "config_error",
            Error::NotFound(_) => "not_found",
            Error::Challenge(_) => "challenge_error",
            Error::Validation(_) => "validation_error",
            Error::Persistence { .. } => "persistence_error",
            Error::Io(_) => "io_error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::NotFound {
            Error::NotFound(err.to_string())
        } else {
            Error::Io(err.to_string())
        }
    }
}
