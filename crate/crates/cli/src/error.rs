use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config {origin}: {message}")]
    Config { origin: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] twinfield::Error),
}

impl CliError {
    /// 1 for I/O failures, 2 for usage and configuration problems.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => 1,
            Self::Config { .. } | Self::Usage(_) | Self::Model(_) => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
