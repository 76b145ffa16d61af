use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unsupported degradation kind: {0}")]
    UnsupportedDegradation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("decode error: {0}")]
    Decode(String),

    #[error("entropy model does not support symbol {symbol} in channel {channel}")]
    ModelSupport { symbol: i32, channel: usize },

    #[error("numerical failure at step {step}: {what}")]
    Numerical { step: usize, what: String },

    #[error("no overlap between curves: {0}")]
    NoOverlap(String),

    #[error("non-monotone quality: turning points at indices {0:?}")]
    NonMonotone(Vec<usize>),

    #[error("training error: {0}")]
    Training(String),

    #[error("missing external score for key {0}")]
    MissingScore(String),

    #[error("csv schema violation at line {line}: {what}")]
    CsvSchema { line: usize, what: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
