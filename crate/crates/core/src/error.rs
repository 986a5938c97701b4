//! Crate-wide error type.

use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("modulus {0} is not prime")]
    NotPrime(u32),
    #[error("field elements have different moduli ({0} and {1})")]
    ModulusMismatch(u32, u32),
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("plane index {index} out of range for q = {q}")]
    PlaneIndexOutOfRange { index: u32, q: u32 },
    #[error("plane index set is empty")]
    EmptyPlaneSet,
    #[error("plane {index} appears in both the {family} set and the AB set")]
    OverlappingPlaneSets { family: char, index: u32 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("work budget exceeded: check needs {required} units, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("numeric degeneracy: {0}")]
    NumericDegeneracy(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
