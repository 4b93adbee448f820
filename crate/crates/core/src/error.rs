use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite elevation after step {step}")]
    NumericalOverflow { step: usize },
    #[error("unknown problem kind `{0}`")]
    UnknownKind(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("covariance adaptation needs at least 2 history entries, got {0}")]
    InsufficientHistory(usize),
    #[error("proposal covariance is not positive definite")]
    FactorizationFailure,
    #[error("surrogate has not been trained yet")]
    SurrogateNotReady,
    #[error("training dataset is empty")]
    EmptyDataset,
    #[error("no posterior samples after burn-in")]
    EmptyPosterior,
    #[error("within-chain variance is zero for parameter {0}")]
    DegenerateChains(usize),
    #[error("paired series have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Whether the error stems from bad user input rather than the environment.
    pub fn is_config(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_))
    }
}
