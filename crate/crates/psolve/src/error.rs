//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("function '{name}' not in supported kernel set (exp, ln, sin, cos, tan)")]
    UnsupportedFunction { name: String },

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    #[error("division by zero polynomial")]
    DivisionByZero,

    #[error("basis closure did not terminate within cap of {0} kernels")]
    KernelCapExceeded(usize),

    #[error("not expressible as a ratio of polynomials in the closed basis: {0}")]
    NotPolynomialOverBasis(String),

    #[error("denominator clearing failed: {0}")]
    ClearingFailed(String),

    #[error("no integrating factor found at this degree")]
    NoIntegratingFactor,

    #[error("time limit exceeded")]
    TimeLimit,

    #[error("{0}")]
    BadInput(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
