use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not square integrable: {0}")]
    NotSquareIntegrable(String),
    #[error("exponent out of the anomalous range: {0}")]
    OutOfAnomalousRange(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
