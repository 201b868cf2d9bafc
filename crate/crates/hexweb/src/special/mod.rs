//! Transcendental layer for the curve-coefficient normal forms: complex
//! gamma, the Gauss hypergeometric function, Ferrers Legendre functions,
//! adaptive integration and Legendre parametrization of the nonlinear
//! coefficient equations, and truncated-series generators.

mod curves;
mod gamma;
mod hyp;
mod legendre;

pub use curves::{
    solve_u, solve_u_at, tan_coefficient_series, u_parametrized, upq_f, v_parametrized, vpq_f,
    w_series_coeffs, ParametrizedPoint, SeriesCoeffs, SolvedCurve, VVariant,
};
pub use gamma::complex_gamma;
pub use hyp::hyp2f1;
pub use legendre::{
    ferrers_p, ferrers_p_dx, ferrers_q, ferrers_q_dx, legendre_p, legendre_q, LegendreParams,
};

use num_complex::Complex64;
use thiserror::Error;

/// Failures in the transcendental layer.
#[derive(Debug, Clone, Error)]
pub enum SpecialError {
    /// The hypergeometric denominator parameter hit a non-positive integer
    /// before the series terminated.
    #[error("hypergeometric parameter pole at c = {c}")]
    ParameterPole { c: Complex64 },
    /// Input outside the covered domain of an evaluation routine.
    #[error("out of domain: {what}")]
    OutOfDomain { what: String },
    /// The denominator 12 + 2t² + 9tU of the U-equation vanished on the
    /// integration path.
    #[error("integration bracket vanished near t = {t}")]
    BracketVanishes { t: f64 },
    /// A Legendre-parametrized f failed its base-point requirements.
    #[error("side condition violated: {what}")]
    SideConditionViolated { what: String },
    /// The requested parametrization variant needs a different connection
    /// constant.
    #[error("variant requires L = -2/3, got L = {l}")]
    WrongVariant { l: Complex64 },
    /// The shifted tangent has a pole at the expansion point.
    #[error("tan(L·x + L1) has a pole at x = 0")]
    PoleAtOrigin,
}
