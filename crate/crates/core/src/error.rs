use thiserror::Error;

use crate::dsl::{EvalError, ParseError};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point was passed outside the declared domain of a multifunction or payoff.
    #[error("domain error: {0}")]
    Domain(String),

    /// A multifunction produced an empty value on its own domain.
    #[error("multifunction `{name}` is not strict: empty value at {point:?}")]
    NotStrict { name: String, point: Vec<f64> },

    #[error("extremum requested over an empty set")]
    EmptySet,

    #[error("undefined extended-real operation: {0}")]
    ExtRealArithmetic(&'static str),

    #[error("payoff is not finite at {point:?}")]
    NonFinitePayoff { point: Vec<f64> },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error(transparent)]
    Eval(#[from] EvalError),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
