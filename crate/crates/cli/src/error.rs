use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] sapt_core::Error),
    #[error("PSRF needs at least 2 run directories, got {0}")]
    InsufficientRuns(usize),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("input has too few rows: {0}")]
    EmptyInput(String),
}

impl CliError {
    /// 2 for configuration problems, 3 for I/O and input-data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_config() => 2,
            CliError::InsufficientRuns(_) | CliError::Config(_) => 2,
            CliError::Core(_) | CliError::Io(_) | CliError::EmptyInput(_) => 3,
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(e.into())
    }
}
