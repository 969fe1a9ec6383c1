use thiserror::Error;

use crate::closed_forms::Regime;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("c = {c} is outside the validity range of regime {regime}")]
    OutOfRegime { c: f64, regime: Regime },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("division by zero: {0}")]
    DivisionByZero(&'static str),

    #[error("point ({x1}, {x2}) is not covered by any region")]
    Unpartitioned { x1: f64, x2: f64 },

    #[error("region `{0}` does not carry a constant gradient")]
    NonConstantGradient(String),

    #[error("objective routes disagree: direct {direct}, boundary form {boundary}")]
    Inconsistent { direct: f64, boundary: f64 },

    #[error("simplex exceeded {0} iterations")]
    IterationLimit(usize),

    #[error("invalid linear program: {0}")]
    InvalidProgram(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
