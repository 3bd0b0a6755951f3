use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} = {value} is outside the domain")]
    Domain { what: &'static str, value: f64 },

    #[error("mode undefined for the {family} tail: alpha must exceed 1 (got {alpha})")]
    ModeUndefined { family: &'static str, alpha: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("row {row}: {source}")]
    Row {
        row: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    Dimension {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown covariate '{0}'")]
    UnknownCovariate(String),

    #[error("invalid data: {0}")]
    Data(String),
}

impl Error {
    pub(crate) fn at_row(self, row: usize) -> Self {
        Error::Row {
            row,
            source: Box::new(self),
        }
    }
}
