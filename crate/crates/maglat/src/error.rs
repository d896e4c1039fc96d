use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unit error: {0}")]
    Units(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("config error at {key}: {msg}")]
    Config { key: String, msg: String },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("expectation mismatch: {0}")]
    Mismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 invalid config, 2 numerical
    /// non-convergence, 3 expectation mismatch.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence(_) => 2,
            Error::Mismatch(_) => 3,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Units(_) => "units",
            Error::Invalid(_) => "invalid",
            Error::Config { .. } => "config",
            Error::NoConvergence(_) => "no_convergence",
            Error::Mismatch(_) => "mismatch",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
