//! Exact symbolic substrate: rational scalars, sparse bivariate polynomials,
//! rational functions, differential forms, and compiled complex evaluators.

mod compiled;
mod forms;
mod poly;
mod rat;
mod ratfn;
pub mod upoly;

pub use compiled::{CPoly, COneForm, CRatFn};
pub use forms::{exterior_derivative, BinaryForm, OneForm, TwoForm};
pub use poly::{Poly2, EXPONENT_CAP};
pub use rat::{rat, rat_pow, ratq, to_c64, to_f64, Rat};
pub use ratfn::RatFn;

use thiserror::Error;

/// Differentiation / evaluation variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

/// Errors from exact arithmetic and pointwise evaluation.
#[derive(Debug, Error)]
pub enum AlgebraError {
    #[error("division by the zero rational function")]
    DivisionByZeroFunction,
    #[error("denominator vanishes at ({x}, {y}) (|den| < {tol})")]
    PoleAtPoint { x: f64, y: f64, tol: f64 },
}
