//! Crate-wide error type.

use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid rectangle [{a}, {b}] x [{c}, {d}]: bounds must be finite with a < b and c < d")]
    InvalidRectangle { a: f64, b: f64, c: f64, d: f64 },

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{name} must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("integrand returned a non-finite value ({value}) at x = {x}")]
    NonFiniteSample { x: f64, value: f64 },

    #[error("function value at ({x}, {y}) is not finite ({value})")]
    NonFiniteValue { x: f64, y: f64, value: f64 },

    #[error("adaptive quadrature on [{a}, {b}] exceeded depth {max_depth} without meeting the tolerance")]
    QuadratureDepthExceeded { a: f64, b: f64, max_depth: u32 },

    #[error("a mixed-partial evaluator is required here but the function does not provide one")]
    MissingMixedPartial,

    #[error(
        "cell [{a}, {b}] x [{c}, {d}] has a zero bound but defect {defect:e}: bound hypothesis violated"
    )]
    HypothesisViolation {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        defect: f64,
    },

    #[error(transparent)]
    Expr(#[from] ExprError),
}
