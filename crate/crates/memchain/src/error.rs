use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Capacity(String),
    #[error(transparent)]
    Core(#[from] memchain_core::Error),
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration and argument errors, 3 for
    /// capacity errors, 4 for I/O errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Capacity(_) | Error::Core(memchain_core::Error::Capacity { .. }) => 3,
            Error::Io { .. } => 4,
            Error::Config(_) | Error::Core(_) | Error::Format { .. } => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
