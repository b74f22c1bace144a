use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, flags or input references.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] memcap::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<CliError>,
    },

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for invalid input or configuration, 1 for runtime failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_invalid_input() => 2,
            CliError::Core(_) | CliError::Io { .. } | CliError::Runtime(_) => 1,
            CliError::Context { source, .. } | CliError::Stage { source, .. } => source.exit_code(),
        }
    }
}

impl From<CliError> for ExitCode {
    fn from(e: CliError) -> Self {
        ExitCode::from(e.exit_code())
    }
}

/// Attaches a description (usually a file name) to an error.
pub(crate) trait WithContext<T> {
    fn context(self, context: impl std::fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<CliError>> WithContext<T> for Result<T, E> {
    fn context(self, context: impl std::fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::Context { context: context.to_string(), source: Box::new(e.into()) })
    }
}

pub(crate) fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
