//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("column {column} is numerically dependent on the preceding columns")]
    RankDeficient { column: usize },

    #[error("triangular factor has a vanishing diagonal entry at index {index}")]
    SingularTriangular { index: usize },

    #[error("matrix is singular to working precision (pivot column {column})")]
    SingularMatrix { column: usize },

    #[error("matrix is not positive definite (failed at row {row})")]
    NotPositiveDefinite { row: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("parameter {t} lies outside the domain [{a}, {b}]")]
    OutOfDomain { t: f64, a: f64, b: f64 },

    #[error("unsupported quadrature order {0} (supported: 1..=16)")]
    UnsupportedOrder(usize),

    #[error("degree {degree} is too low, at least {required} is needed")]
    DegreeTooLow { degree: usize, required: usize },

    #[error("exponential overflow: iterate value {value} exceeds the safe range")]
    Overflow { value: f64 },

    #[error("grid cannot be coarsened further: {0}")]
    TooCoarse(String),

    #[error("zero diagonal entry at row {row}")]
    ZeroDiagonal { row: usize },

    #[error("iteration limit reached with residual {residual:e}")]
    MaxIterExceeded { residual: f64 },

    #[error("extrapolation weights sum to zero")]
    ZeroDenominator,

    #[error("iteration diverged (residual {residual:e})")]
    Diverged { residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
