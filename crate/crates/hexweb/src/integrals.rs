//! First integrals induced by a symmetry of a flat reduced web: the alpha
//! and beta coefficient functions, the cubic whose roots are the squared
//! integrals divided by k², and pointwise numeric verification including the
//! abelian sign relation.

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{rat, AlgebraError, COneForm, RatFn};
use crate::numeric;
use crate::symmetry::{symmetry_residual, PlaneVectorField, SymmetryError};
use crate::webform::{coframe_at, ReducedODE, WebCoframe, WebError};

/// Errors from first-integral construction and verification.
#[derive(Debug, Error)]
pub enum IntegralError {
    #[error("the web is not flat; the first-integral cubic does not apply")]
    NotFlat,
    #[error("the vector field is not a symmetry of the web")]
    NotSymmetry,
    #[error("point ({x}, {y}) lies on the discriminant")]
    OnDiscriminant { x: Complex64, y: Complex64 },
    #[error(transparent)]
    Web(WebError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

impl From<WebError> for IntegralError {
    fn from(e: WebError) -> Self {
        match e {
            WebError::OnDiscriminant { x, y } => IntegralError::OnDiscriminant { x, y },
            other => IntegralError::Web(other),
        }
    }
}

impl From<AlgebraError> for IntegralError {
    fn from(e: AlgebraError) -> Self {
        IntegralError::Web(WebError::from(e))
    }
}

/// Coefficient functions of the first-integral cubic:
/// α = ξ²A² − 3η²A − 9ξηB and β = (4A³ + 27B²)(η³ + ξ²ηA + ξ³B)².
pub fn alpha_beta(ode: &ReducedODE, x: &PlaneVectorField) -> (RatFn, RatFn) {
    let (a, b) = (&ode.a, &ode.b);
    let (xi, eta) = (&x.xi, &x.eta);
    let xi2 = xi * xi;
    let eta2 = eta * eta;

    let t1 = &xi2 * &(a * a);
    let t2 = &RatFn::constant(rat(3)) * &(&eta2 * a);
    let t3 = &RatFn::constant(rat(9)) * &(&(xi * eta) * b);
    let alpha = &(&t1 - &t2) - &t3;

    let inner = &(&(&eta2 * eta) + &(&(&xi2 * eta) * a)) + &(&(&xi2 * xi) * b);
    let beta = &ode.discriminant() * &(&inner * &inner);
    (alpha, beta)
}

/// Values of the first-integral cubic's roots at a point, in lexicographic
/// order, together with the alpha and beta values there.
#[derive(Clone, Debug)]
pub struct FirstIntegralTriple {
    pub point: (Complex64, Complex64),
    pub u: [Complex64; 3],
    pub alpha_val: Complex64,
    pub beta_val: Complex64,
}

/// Solves U³ − 2αU² + α²U + β = 0 at a regular point.
pub fn first_integral_values(
    ode: &ReducedODE,
    x: &PlaneVectorField,
    point: (Complex64, Complex64),
) -> Result<FirstIntegralTriple, IntegralError> {
    coframe_at(&ode.to_cubic(), point)?;
    triple_at(ode, x, point)
}

/// Cubic solve without the regularity guard, for use on displaced points
/// during finite differencing.
fn triple_at(
    ode: &ReducedODE,
    x: &PlaneVectorField,
    point: (Complex64, Complex64),
) -> Result<FirstIntegralTriple, IntegralError> {
    let (alpha, beta) = alpha_beta(ode, x);
    let alpha_val = alpha.eval(point.0, point.1)?;
    let beta_val = beta.eval(point.0, point.1)?;
    let one = Complex64::new(1.0, 0.0);
    let mut roots =
        numeric::cubic_roots(one, -2.0 * alpha_val, alpha_val * alpha_val, beta_val);
    roots.sort_by(numeric::lex_cmp);
    Ok(FirstIntegralTriple { point, u: roots, alpha_val, beta_val })
}

/// Branch products W_i = (p_j − p_k)²(η − p_i ξ)² with (i, j, k) cyclic;
/// the cubic's roots coincide with these values.
fn branch_products(frame: &WebCoframe, xi: Complex64, eta: Complex64) -> [Complex64; 3] {
    let p = frame.roots;
    let mut w = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let v = (p[j] - p[k]) * (eta - p[i] * xi);
        w[i] = v * v;
    }
    w
}

/// Assignment of cubic roots to branches minimizing the total pairwise
/// cross-ratio defect |U_{σ(i)}·W_j − U_{σ(j)}·W_i|.
fn match_roots_to_branches(u: &[Complex64; 3], w: &[Complex64; 3]) -> [usize; 3] {
    let perms: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best = perms[0];
    let mut best_score = f64::INFINITY;
    for perm in perms {
        let mut score = 0.0;
        for i in 0..3 {
            for j in (i + 1)..3 {
                score += (u[perm[i]] * w[j] - u[perm[j]] * w[i]).norm();
            }
        }
        if score < best_score {
            best_score = score;
            best = perm;
        }
    }
    best
}

/// Per-branch outcome of the first-integral verification.
#[derive(Clone, Debug)]
pub struct BranchIntegralCheck {
    /// Direction root p_i of the branch at the base point.
    pub slope: Complex64,
    /// Root of the cubic matched to this branch.
    pub u_value: Complex64,
    /// |dU_i(1, p_i) − 2·γ(1, p_i)·U_i| relative to the local scale.
    pub residual: f64,
}

/// Result of verifying that the cubic's roots behave as first integrals.
#[derive(Clone, Debug)]
pub struct IntegralCheck {
    pub triple: FirstIntegralTriple,
    pub branches: [BranchIntegralCheck; 3],
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Checks numerically that each matched root satisfies
/// dU_i(1, p_i) = 2·γ(1, p_i)·U_i at the point, which is the condition for
/// k²U_i to be constant along the i-th foliation (k is never constructed;
/// its logarithmic derivative −γ substitutes for it).
pub fn verify_first_integral(
    ode: &ReducedODE,
    x: &PlaneVectorField,
    point: (Complex64, Complex64),
    tol: f64,
) -> Result<IntegralCheck, IntegralError> {
    if !ode.is_flat() {
        return Err(IntegralError::NotFlat);
    }
    if !symmetry_residual(&ode.to_cubic(), x)?.is_zero() {
        return Err(IntegralError::NotSymmetry);
    }
    let frame = coframe_at(&ode.to_cubic(), point)?;
    let triple = triple_at(ode, x, point)?;
    let xi_val = x.xi.eval(point.0, point.1)?;
    let eta_val = x.eta.eval(point.0, point.1)?;
    let w = branch_products(&frame, xi_val, eta_val);
    let perm = match_roots_to_branches(&triple.u, &w);
    let gamma = COneForm::compile(&ode.chern_connection()?);

    let h = 1e-5 * point.0.norm().max(point.1.norm()).max(1.0);
    let one = Complex64::new(1.0, 0.0);
    let mut branches = Vec::with_capacity(3);
    let mut max_residual = 0.0f64;
    for i in 0..3 {
        let p_i = frame.roots[i];
        let u_i = triple.u[perm[i]];
        // Root-continued central difference along the leaf direction (1, p_i).
        let mut samples = [Complex64::new(0.0, 0.0); 2];
        for (slot, sign) in [(0usize, -1.0), (1usize, 1.0)] {
            let q = (point.0 + sign * h, point.1 + sign * h * p_i);
            let shifted = triple_at(ode, x, q)?;
            samples[slot] = shifted
                .u
                .iter()
                .copied()
                .min_by(|a, b| (a - u_i).norm().total_cmp(&(b - u_i).norm()))
                .expect("three roots");
        }
        let du = (samples[1] - samples[0]) / (2.0 * h);
        let gamma_leaf = gamma.pair(point.0, point.1, one, p_i);
        let defect = du - 2.0 * gamma_leaf * u_i;
        let scale = u_i.norm().max(du.norm()).max(1.0);
        let residual = defect.norm() / scale;
        max_residual = max_residual.max(residual);
        branches.push(BranchIntegralCheck { slope: p_i, u_value: u_i, residual });
    }
    let branches: [BranchIntegralCheck; 3] =
        branches.try_into().expect("exactly three branches");
    Ok(IntegralCheck { triple, branches, max_residual, tol, pass: max_residual <= tol })
}

/// True iff some sign choice ε_i ∈ {±1} makes Σ ε_i √(U_i) vanish within
/// tol·max|√(U_i)|. The squared integrals admit such a relation because the
/// underlying u_i sum to zero.
pub fn abelian_sign_check(triple: &FirstIntegralTriple, tol: f64) -> bool {
    let s: Vec<Complex64> = triple.u.iter().map(|u| u.sqrt()).collect();
    let scale = s.iter().map(|v| v.norm()).fold(0.0, f64::max);
    for e2 in [1.0, -1.0] {
        for e3 in [1.0, -1.0] {
            if (s[0] + e2 * s[1] + e3 * s[2]).norm() <= tol * scale {
                return true;
            }
        }
    }
    false
}
