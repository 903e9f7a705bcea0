use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("bad data: {0}")]
    Data(String),

    #[error("label error: {0}")]
    Label(String),

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    // Source-carrying variants leave the cause out of their own message so
    // that chain-walking formatters (anyhow's `{:#}`) do not print it twice.
    #[error("io error")]
    Io(#[from] std::io::Error),

    #[error("serialization error")]
    Json(#[from] serde_json::Error),

    #[error("csv error")]
    Csv(#[from] csv::Error),

    #[error("format error: {0}")]
    Format(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error(
        "solver did not converge: KKT violation {violation:.3e} after {iterations} pair updates"
    )]
    Convergence { violation: f64, iterations: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("regularization failed: min eigenvalue {min_eigenvalue:.3e} after largest jitter")]
    RegularizationFailure { min_eigenvalue: f64 },

    #[error("protocol error: {0}")]
    Protocol(String),
}
