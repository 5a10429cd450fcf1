//! Exact coefficient arithmetic.
//!
//! Two coefficient domains cover everything downstream:
//! - [`HalfLaurent`]: Laurent polynomials and truncated Laurent series in
//!   `q^{1/2}`, with exponents stored in half-units (the integer key `h`
//!   stands for `q^{h/2}`).
//! - [`QRational`]: rational functions, kept in a canonical reduced form so
//!   that equality is structural.
//!
//! Plus polynomial interpolation with holdout verification, used to
//! reconstruct point-count polynomials from finite-field samples.

mod half_laurent;
mod interp;
mod qrational;

pub use half_laurent::{rat, rat_i, HalfLaurent, Int, Rat};
pub use interp::interpolate_polynomial;
pub use qrational::QRational;

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum QArithError {
    #[error("operation requires an exact Laurent polynomial, got a windowed series")]
    WindowedInput,
    #[error("division by zero (or by a series not certified nonzero)")]
    DivisionByZero,
    #[error("window too short to determine the result")]
    InsufficientPrecision,
    #[error("half-integer powers of q cannot be evaluated at a rational point")]
    OddHalfPower,
    #[error("denominator vanishes at the evaluation point")]
    EvalAtPole,
    #[error("need at least {needed} samples at distinct points, got {got}")]
    NotEnoughSamples { needed: usize, got: usize },
    #[error("duplicate sample point {point}")]
    DuplicateSamplePoint { point: String },
    #[error("holdout sample at q={point} expects {expected}, interpolant gives {got}; count is not polynomial in q")]
    HoldoutMismatch {
        point: String,
        expected: String,
        got: String,
    },
}
