use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite input component at index {index}")]
    NonFiniteInput { index: usize },

    #[error("log-density is NaN")]
    NanLogDensity,

    #[error("non-finite log-density at the current position")]
    NonFiniteCurrent,

    #[error("non-finite gradient of the log-density for draw {draw}")]
    NonFiniteGradient { draw: usize },

    #[error("diagonal entry {index} of the Cholesky factor is {value}, below the floor")]
    DiagonalBelowFloor { index: usize, value: f64 },

    #[error("invalid Cholesky factor: {0}")]
    InvalidFactor(&'static str),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("Cholesky bank is empty")]
    EmptyBank,

    #[error("at least {needed} samples are required, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, iteration: usize) -> Self {
        Error::AtIteration {
            iteration,
            source: Box::new(self),
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
