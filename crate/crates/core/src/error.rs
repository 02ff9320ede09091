use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input row (0-based data-row index, header excluded).
    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("non-positive or non-finite price {value} for {ticker} on {date}")]
    InvalidPrice {
        ticker: String,
        date: String,
        value: f64,
    },

    #[error("duplicate observation for {ticker} on {date}")]
    Duplicate { ticker: String, date: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("ticker {0} has no observed price on the first date")]
    LeadingGap(String),

    #[error("table has missing prices; forward-fill it first")]
    MissingData,

    #[error("zero volatility for {}", .ticker.as_deref().unwrap_or("series"))]
    ZeroVolatility { ticker: Option<String> },

    #[error("out of range: {0}")]
    Range(String),

    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse failure classes, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Data,
    Infeasible,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Validation(_) | Error::Range(_) => ErrorKind::Validation,
            Error::Infeasible(_) => ErrorKind::Infeasible,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
