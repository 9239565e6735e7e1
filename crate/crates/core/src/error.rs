use thiserror::Error;

/// Library-wide error type. The CLI maps `Config`/`Dimension`/`Payload`
/// to exit status 2 and `Numerical` to exit status 3.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("payload: {0}")]
    Payload(String),

    #[error("hypothesis budget exceeded: {0}; use LMMSE")]
    Budget(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("numerical: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
