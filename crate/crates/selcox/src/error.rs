use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Input data violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numerical routine could not produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A linear system was singular where invertibility is required.
    #[error("singular information matrix on subset {subset:?}")]
    SingularInformation { subset: Vec<usize> },

    /// Structured-input (CSV/JSON) problems, naming the offending location.
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn schema(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            location: location.into(),
            message: message.into(),
        }
    }
}
