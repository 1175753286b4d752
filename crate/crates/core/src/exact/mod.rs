//! Exact arithmetic foundations: rationals, the cyclotomic field Q(zeta_7),
//! integer matrices with Smith normal form, and sparse multivariate
//! polynomials. Everything downstream is built on these; no floating point
//! appears anywhere.

pub mod cyclo;
pub mod intmat;
pub mod poly;

pub use cyclo::{CycloNum, Rational};
pub use intmat::IntMatrix;
pub use poly::{MultiPoly, VarContext};

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ExactError {
    #[error("division by zero in Q(zeta_7)")]
    DivisionByZero,
    #[error("exact division left a nonzero remainder: {remainder}")]
    InexactDivision { remainder: String },
    #[error("polynomials live in different variable contexts: {0} vs {1}")]
    ContextMismatch(String, String),
    #[error("{0}")]
    Degenerate(String),
}

pub type ExactResult<T> = Result<T, ExactError>;
