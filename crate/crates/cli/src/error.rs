use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Io(String),

    #[error("line {line}: {message}")]
    Input { line: u64, message: String },

    #[error("config `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Check(String),

    #[error(transparent)]
    Core(#[from] kappa_core::Error),
}
