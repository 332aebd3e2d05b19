use thiserror::Error;

/// Errors raised by the solvers, the verification layer and the scenario runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DropletError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("numeric failure: {message} (residual estimate {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("breakdown: {0}")]
    Breakdown(String),

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl DropletError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        DropletError::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for DropletError {
    fn from(e: std::io::Error) -> Self {
        DropletError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, DropletError>;
