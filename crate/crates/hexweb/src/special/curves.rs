//! Realizations of the transcendental coefficient functions U(T), V(T),
//! W(s), and the shifted-tangent series b(x): adaptive integration of the
//! nonlinear first-order equation for U, Legendre-based closed-form
//! parametrizations of U and V, and truncated Taylor generators.

use super::legendre::{ferrers_p, ferrers_p_dx, ferrers_q, ferrers_q_dx, LegendreParams};
use super::SpecialError;
use crate::numeric::{rk45, OdeStop};
use crate::series;
use num_complex::Complex64;

/// 3√3, the scale between f'/f and T in the parametrizations.
const THREE_ROOT3: f64 = 5.196_152_422_706_632;
/// 2/(3√3), the amplitude of the tangent substitutions.
const KAPPA: f64 = 0.384_900_179_459_750_47;
/// Step cap for the U-integration; the singular locus of the field is the
/// bracket zero set, and steps must stay below its clearance scale so the
/// integrator cannot jump across it between stages.
const MAX_STEP_U: f64 = 0.02;
/// Hard cap on requested series orders.
const MAX_ORDER: usize = 512;

/// Truncated Taylor coefficients of a named series variable.
#[derive(Debug, Clone)]
pub struct SeriesCoeffs {
    pub variable: String,
    pub coeffs: Vec<Complex64>,
    pub order: usize,
}

impl SeriesCoeffs {
    /// Wraps coefficients; the order is the length minus one.
    fn new(variable: &str, coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        let order = coeffs.len() - 1;
        SeriesCoeffs { variable: variable.into(), coeffs, order }
    }

    /// Horner evaluation of the truncation.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }
}

/// A solved coefficient function: its Taylor head at the origin plus a
/// uniformly sampled arc of the actual solution.
#[derive(Debug, Clone)]
pub struct SolvedCurve {
    pub series: SeriesCoeffs,
    pub samples: Vec<(f64, Complex64)>,
}

/// One sample of a Legendre-parametrized curve: the parameter z, the
/// tangent coordinate T(z), and the coefficient value (U or V) there.
#[derive(Debug, Clone, Copy)]
pub struct ParametrizedPoint {
    pub z: f64,
    pub t: Complex64,
    pub value: Complex64,
}

/// Which solution family parametrizes V(T).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VVariant {
    /// f carries only the analytic Frobenius component at z = 0.
    Standard,
    /// L = -2/3 family keeping both Frobenius components alive, which gives
    /// the reciprocal coefficient function an order-2 pole.
    SpecialL,
}

fn map_stop(stop: OdeStop) -> SpecialError {
    match stop {
        // The bracket zero set is the only singular locus of the field, so
        // both singular stops report it.
        OdeStop::DerivativeFailed { t } | OdeStop::StepUnderflow { t } => {
            SpecialError::BracketVanishes { t }
        }
        OdeStop::BudgetExhausted => SpecialError::OutOfDomain {
            what: "integration budget exhausted".into(),
        },
    }
}

/// Values of the solution to [12+2t²+9tU] U' = L(4+27U²), U(0) = u0, at the
/// prescribed parameter values (any order; integration fans out from 0).
pub fn solve_u_at(
    l: Complex64,
    u0: Complex64,
    ts: &[f64],
    tol: f64,
) -> Result<Vec<Complex64>, SpecialError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut deriv = |t: f64, y: &[Complex64], dy: &mut [Complex64]| -> bool {
        let u = y[0];
        let bracket = Complex64::new(12.0 + 2.0 * t * t, 0.0) + 9.0 * t * u;
        let scale = 12.0 + 2.0 * t * t + (9.0 * t * u).norm();
        if bracket.norm() <= 1e-8 * scale {
            return false;
        }
        dy[0] = l * (4.0 + 27.0 * u * u) / bracket;
        true
    };
    let mut out = vec![Complex64::new(0.0, 0.0); ts.len()];
    for side in [-1.0f64, 1.0] {
        let mut targets: Vec<usize> = (0..ts.len()).filter(|&i| side * ts[i] > 0.0).collect();
        targets.sort_by(|&a, &b| ts[a].abs().partial_cmp(&ts[b].abs()).unwrap());
        let mut cur = 0.0;
        let mut y = [u0];
        for i in targets {
            rk45(&mut deriv, cur, ts[i], &mut y, tol, MAX_STEP_U).map_err(map_stop)?;
            cur = ts[i];
            out[i] = y[0];
        }
    }
    for (i, &t) in ts.iter().enumerate() {
        if t == 0.0 {
            out[i] = u0;
        }
    }
    Ok(out)
}

/// Solves the U-equation from U(0) = u0 out to |T| = t_max, returning the
/// Taylor head at 0 plus 2·side_samples+1 uniform samples.
pub fn solve_u(
    l: Complex64,
    u0: Complex64,
    t_max: f64,
    tol: f64,
    side_samples: usize,
) -> Result<SolvedCurve, SpecialError> {
    if !(t_max > 0.0) || side_samples == 0 {
        return Err(SpecialError::OutOfDomain {
            what: "need t_max > 0 and at least one sample per side".into(),
        });
    }
    let n = side_samples as i64;
    let ts: Vec<f64> = (-n..=n).map(|k| t_max * k as f64 / n as f64).collect();
    let values = solve_u_at(l, u0, &ts, tol)?;
    let series = SeriesCoeffs::new("T", series::u_series(&l, &u0, crate::tol::SERIES_ORDER));
    Ok(SolvedCurve { series, samples: ts.into_iter().zip(values).collect() })
}

/// f(z) = cos^{mu}(z)·[C1·P^mu_nu + C2·Q^mu_nu](sin z) and its z-derivative.
pub fn upq_f(
    params: &LegendreParams,
    c1: Complex64,
    c2: Complex64,
    z: f64,
) -> Result<(Complex64, Complex64), SpecialError> {
    let (mu, nu) = (params.mu, params.nu);
    let cz = z.cos();
    if cz <= 1e-9 {
        return Err(SpecialError::OutOfDomain {
            what: format!("z = {z} is outside the principal strip |z| < pi/2"),
        });
    }
    let x = z.sin();
    let g = c1 * ferrers_p(mu, nu, x)? + c2 * ferrers_q(mu, nu, x)?;
    let dg = c1 * ferrers_p_dx(mu, nu, x)? + c2 * ferrers_q_dx(mu, nu, x)?;
    // The prefactor exponent is +mu: matching the first-derivative term of
    // the linear equation forces (1-x²)^{-m/2} with m = (1/(3L)-1)/2 = -mu.
    let pref = (mu * cz.ln()).exp();
    let f = pref * g;
    let fp = pref * (cz * dg - mu * z.tan() * g);
    Ok((f, fp))
}

/// f(z) = sin^{mu}(z)·g(cos z) and its z-derivative, where g is P^mu_nu for
/// the standard family and P^mu_nu + P^{-mu}_nu for the L = -2/3 family.
pub fn vpq_f(
    params: &LegendreParams,
    variant: VVariant,
    z: f64,
) -> Result<(Complex64, Complex64), SpecialError> {
    let (mu, nu) = (params.mu, params.nu);
    let (sz, cz) = (z.sin(), z.cos());
    if sz <= 1e-9 || cz <= 1e-9 {
        return Err(SpecialError::OutOfDomain {
            what: format!("z = {z} is outside the open interval (0, pi/2)"),
        });
    }
    let (g, dg) = match variant {
        VVariant::Standard => (ferrers_p(mu, nu, cz)?, ferrers_p_dx(mu, nu, cz)?),
        VVariant::SpecialL => {
            // At mu - nu = 2 the second-kind function collapses onto the
            // first kind (its reflection coefficient has a gamma-pole zero),
            // so the independent pair on the cut is P^{±mu}. Their sum keeps
            // the z^{2mu} Frobenius component at z = 0 alive, which is what
            // gives -1/V its order-2 pole in T.
            (
                ferrers_p(mu, nu, cz)? + ferrers_p(-mu, nu, cz)?,
                ferrers_p_dx(mu, nu, cz)? + ferrers_p_dx(-mu, nu, cz)?,
            )
        }
    };
    let pref = (mu * sz.ln()).exp();
    let f = pref * g;
    let fp = pref * (mu * (cz / sz) * g - sz * dg);
    Ok((f, fp))
}

/// Narrows a bracketed minimum of a scalar function by ternary search.
fn refine_min(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..90 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    0.5 * (lo + hi)
}

/// The U(T) curve parametrized by f = cos^{mu}·[C1 P + C2 Q](sin z):
/// T = 3√3·L·f'/f and U = -(2/(3√3))·tan z. The base-point requirements
/// (f' vanishes somewhere on the principal strip, with f nonzero there) are
/// verified globally before sampling the requested window.
pub fn u_parametrized(
    params: &LegendreParams,
    c1: Complex64,
    c2: Complex64,
    z_lo: f64,
    z_hi: f64,
    n: usize,
) -> Result<Vec<ParametrizedPoint>, SpecialError> {
    let limit = std::f64::consts::FRAC_PI_2 - 1e-6;
    if n < 8 || !(z_lo < z_hi) || z_lo <= -limit || z_hi >= limit {
        return Err(SpecialError::OutOfDomain {
            what: "need n >= 8 and a window inside (-pi/2, pi/2)".into(),
        });
    }
    // Base-point search over the whole strip, independent of the window.
    let probe_edge = 1.5;
    let probes = 257;
    let mut best = (f64::INFINITY, 0.0f64);
    let mut max_fp = 0.0f64;
    let mut max_f = 0.0f64;
    let mut probe_z = Vec::with_capacity(probes);
    for k in 0..probes {
        let z = -probe_edge + 2.0 * probe_edge * k as f64 / (probes - 1) as f64;
        let (f, fp) = upq_f(params, c1, c2, z)?;
        max_fp = max_fp.max(fp.norm());
        max_f = max_f.max(f.norm());
        if fp.norm() < best.0 {
            best = (fp.norm(), z);
        }
        probe_z.push(z);
    }
    let h = probe_z[1] - probe_z[0];
    let slope_norm = |z: f64| upq_f(params, c1, c2, z).map(|v| v.1.norm()).unwrap_or(f64::MAX);
    let z_star = refine_min(&slope_norm, (best.1 - h).max(-probe_edge), (best.1 + h).min(probe_edge));
    let (f_star, fp_star) = upq_f(params, c1, c2, z_star)?;
    if fp_star.norm() > 1e-7 * max_fp {
        return Err(SpecialError::SideConditionViolated {
            what: "f' has no zero on the principal strip; the curve misses T = 0".into(),
        });
    }
    if f_star.norm() <= 1e-8 * max_f {
        return Err(SpecialError::SideConditionViolated {
            what: format!("f vanishes at the base point z0 = {z_star:.6}"),
        });
    }
    let mut pts = Vec::with_capacity(n);
    let mut sampled = Vec::with_capacity(n);
    let mut window_max_f = 0.0f64;
    for k in 0..n {
        let z = z_lo + (z_hi - z_lo) * k as f64 / (n - 1) as f64;
        let (f, fp) = upq_f(params, c1, c2, z)?;
        window_max_f = window_max_f.max(f.norm());
        sampled.push((z, f, fp));
    }
    for (z, f, fp) in sampled {
        if f.norm() < 1e-12 * window_max_f {
            return Err(SpecialError::SideConditionViolated {
                what: format!("f vanishes inside the window near z = {z:.6}"),
            });
        }
        pts.push(ParametrizedPoint {
            z,
            t: THREE_ROOT3 * params.l * fp / f,
            value: Complex64::new(-KAPPA * z.tan(), 0.0),
        });
    }
    Ok(pts)
}

/// The V(T) curve parametrized by f = sin^{mu}·g(cos z) on (0, pi/2):
/// T = 3√3·L·f'/f and V = -(3√3/2)·tan z, so that U = -1/V solves the
/// U-equation with a pole at T = 0.
pub fn v_parametrized(
    params: &LegendreParams,
    variant: VVariant,
    z_lo: f64,
    z_hi: f64,
    n: usize,
) -> Result<Vec<ParametrizedPoint>, SpecialError> {
    if variant == VVariant::SpecialL {
        let target = Complex64::new(-2.0 / 3.0, 0.0);
        if (params.l - target).norm() > 1e-12 {
            return Err(SpecialError::WrongVariant { l: params.l });
        }
    }
    let limit = std::f64::consts::FRAC_PI_2 - 1e-6;
    if n < 2 || !(z_lo < z_hi) || z_lo <= 1e-6 || z_hi >= limit {
        return Err(SpecialError::OutOfDomain {
            what: "need n >= 2 and a window inside (0, pi/2)".into(),
        });
    }
    let mut sampled = Vec::with_capacity(n);
    let mut max_f = 0.0f64;
    for k in 0..n {
        let z = z_lo + (z_hi - z_lo) * k as f64 / (n - 1) as f64;
        let (f, fp) = vpq_f(params, variant, z)?;
        max_f = max_f.max(f.norm());
        sampled.push((z, f, fp));
    }
    let mut pts = Vec::with_capacity(n);
    for (z, f, fp) in sampled {
        if f.norm() < 1e-12 * max_f {
            return Err(SpecialError::SideConditionViolated {
                what: format!("f vanishes inside the window near z = {z:.6}"),
            });
        }
        pts.push(ParametrizedPoint {
            z,
            t: THREE_ROOT3 * params.l * fp / f,
            value: Complex64::new(-z.tan() / KAPPA, 0.0),
        });
    }
    Ok(pts)
}

/// Taylor head of the W coefficient function for the given exponent offset.
pub fn w_series_coeffs(l0: u32, w0: Complex64, order: usize) -> SeriesCoeffs {
    assert!(order <= MAX_ORDER, "series order capped at {MAX_ORDER}");
    SeriesCoeffs::new("s", series::w_series(l0, &w0, order))
}

/// Taylor head of b(x) = (2/(3√3))·tan(L·x + L1) at x = 0.
pub fn tan_coefficient_series(
    l: Complex64,
    l1: f64,
    order: usize,
) -> Result<SeriesCoeffs, SpecialError> {
    assert!(order <= MAX_ORDER, "series order capped at {MAX_ORDER}");
    if l1.cos().abs() < 1e-12 {
        return Err(SpecialError::PoleAtOrigin);
    }
    let b0 = Complex64::new(KAPPA * l1.tan(), 0.0);
    let cl = KAPPA * l;
    let loc = l / KAPPA;
    Ok(SeriesCoeffs::new("x", series::quadratic_riccati_series(&cl, &loc, &b0, order)))
}
