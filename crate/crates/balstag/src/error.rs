use std::path::PathBuf;

use balstag_core::Error as CoreError;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const IO: u8 = 3;
    pub const BUDGET: u8 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: invalid JSON at {at}: {message}")]
    Json {
        path: PathBuf,
        at: String,
        message: String,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {reason}")]
    Mismatch { path: PathBuf, reason: String },
    #[error("{context}{source}")]
    Core {
        context: String,
        #[source]
        source: CoreError,
    },
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn core(path: Option<&std::path::Path>, source: CoreError) -> Self {
        let context = path
            .map(|p| format!("{}: ", p.display()))
            .unwrap_or_default();
        AppError::Core { context, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => exit::USAGE,
            AppError::Io { .. }
            | AppError::Json { .. }
            | AppError::Csv { .. }
            | AppError::Mismatch { .. } => exit::IO,
            AppError::Core { source, .. } => match source {
                CoreError::BudgetExceeded { .. } | CoreError::OracleBudget { .. } => exit::BUDGET,
                CoreError::InvalidParameter(_) => exit::USAGE,
                CoreError::Schema { .. }
                | CoreError::InvalidTrip { .. }
                | CoreError::InvalidRoute(_) => exit::IO,
                _ => exit::USAGE,
            },
        }
    }
}

impl From<CoreError> for AppError {
    fn from(source: CoreError) -> Self {
        AppError::core(None, source)
    }
}

pub type AppResult<T> = Result<T, AppError>;
