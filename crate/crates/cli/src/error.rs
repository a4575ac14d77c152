use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("line {line}: unknown {what} `{name}`")]
    UnknownKey {
        line: usize,
        what: &'static str,
        name: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] degenpop::Error),
    #[error("{failed} of {total} properties failed")]
    SelftestFailed { failed: usize, total: usize },
}

impl CliError {
    /// Name printed on the `error=<Name>` line.
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "Usage",
            CliError::Config(_) => "Config",
            CliError::UnknownKey { .. } => "UnknownKey",
            CliError::Io { .. } => "Io",
            CliError::Core(e) => e.name(),
            CliError::SelftestFailed { .. } => "SelftestFailed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::SelftestFailed { .. } => 1,
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
