use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by zero: (1+b) vanishes at the requested point")]
    DivisionByZero,

    #[error("degree budget exceeded: need working degree {needed}, have {available}")]
    DegreeBudget { needed: u32, available: u32 },

    #[error("variable {0} has no value in the assignment")]
    UnassignedVariable(&'static str),

    #[error("exponent overflow in monomial arithmetic")]
    ExponentOverflow,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("partition size {size} exceeds the configured bound {bound}")]
    BoundExceeded { size: u32, bound: u32 },

    #[error("denominator is not a power of (1+b): {0}")]
    ForeignDenominator(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
