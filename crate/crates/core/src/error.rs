use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{what} is not available; supported: {supported}")]
    NotAvailable { what: String, supported: String },

    #[error("not measurable: {0}")]
    NotMeasurable(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::InvalidInput(format!(
            "shape mismatch: expected {}, got {}",
            expected.to_string(),
            actual.to_string()
        ))
    }
}
