//! Low-level complex numerics shared across modules: cubic root extraction,
//! Newton polishing, periodic quadrature, and an adaptive Runge-Kutta
//! integrator for small complex systems.

use num_complex::Complex64;

/// Primitive cube root of unity.
pub(crate) fn omega() -> Complex64 {
    Complex64::new(-0.5, 0.75f64.sqrt())
}

/// All three roots of c3·z³ + c2·z² + c1·z + c0 with c3 ≠ 0, unsorted.
///
/// Closed-form Cardano with the large-|u| branch choice for stability,
/// followed by Newton polishing against the original coefficients. Repeated
/// roots come out approximately equal; callers that need distinct directions
/// guard on the discriminant before calling.
pub(crate) fn cubic_roots(
    c3: Complex64,
    c2: Complex64,
    c1: Complex64,
    c0: Complex64,
) -> [Complex64; 3] {
    let a = c2 / c3;
    let b = c1 / c3;
    let c = c0 / c3;
    // Depressed form s³ + p·s + q via z = s − a/3.
    let p = b - a * a / 3.0;
    let q = c - a * b / 3.0 + a * a * a * (2.0 / 27.0);
    let shift = -a / 3.0;

    let scale = p.norm().max(q.norm());
    let mut roots = if scale == 0.0 {
        [shift; 3]
    } else {
        let disc = q * q / 4.0 + p * p * p / 27.0;
        let sq = disc.sqrt();
        let r_plus = -q / 2.0 + sq;
        let r_minus = -q / 2.0 - sq;
        let r = if r_plus.norm() >= r_minus.norm() { r_plus } else { r_minus };
        let u = r.cbrt();
        let w = omega();
        if u.norm() <= 1e-150 {
            // p ≈ 0 here, so s³ = −q and the roots spread by cube roots of unity.
            let s = (-q).cbrt();
            [s + shift, s * w + shift, s * w * w + shift]
        } else {
            let v = -p / (3.0 * u);
            let s0 = u + v;
            let s1 = u * w + v * w * w;
            let s2 = u * w * w + v * w;
            [s0 + shift, s1 + shift, s2 + shift]
        }
    };

    for z in &mut roots {
        *z = polish_cubic_root(c3, c2, c1, c0, *z);
    }
    roots
}

/// A few Newton steps on the original cubic; stops when the step stalls.
fn polish_cubic_root(
    c3: Complex64,
    c2: Complex64,
    c1: Complex64,
    c0: Complex64,
    mut z: Complex64,
) -> Complex64 {
    for _ in 0..3 {
        let f = ((c3 * z + c2) * z + c1) * z + c0;
        let fp = (3.0 * c3 * z + 2.0 * c2) * z + c1;
        if fp.norm() <= 1e-300 {
            break;
        }
        let step = f / fp;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Total lexicographic order by (re, im); used for deterministic root lists.
pub(crate) fn lex_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im))
}

/// All complex roots of a dense polynomial (ascending coefficients, leading
/// coefficient nonzero) by Durand-Kerner iteration with Newton polishing.
/// Returned sorted by lex_cmp. Degrees used here stay below ~12.
pub(crate) fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len().checked_sub(1).expect("nonempty coefficients");
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    assert!(lead.norm() > 0.0, "leading coefficient must be nonzero");
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in monic.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };

    // Cauchy root bound, then seeds on a spiral inside it.
    let bound = 1.0 + monic.iter().take(deg).map(|c| c.norm()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| seed.powu(k as u32 + 1) * bound)
        .collect();

    for _ in 0..256 {
        let mut moved = 0.0f64;
        for k in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            if denom.norm() <= 1e-300 {
                // Collided seeds; nudge apart and retry next sweep.
                z[k] += Complex64::new(1e-7, 1e-7);
                continue;
            }
            let step = eval(z[k]) / denom;
            z[k] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-14 * bound {
            break;
        }
    }

    // Newton polish against the monic polynomial; repeated roots stall at
    // the cluster, which is accurate enough for branch bookkeeping.
    for r in &mut z {
        let f = |w: Complex64| {
            let mut v = Complex64::new(0.0, 0.0);
            let mut d = Complex64::new(0.0, 0.0);
            for c in monic.iter().rev() {
                d = d * w + v;
                v = v * w + c;
            }
            (v, d)
        };
        if let Some(p) = newton(f, *r, 1e-13 * bound.max(1.0), 8) {
            *r = p;
        }
    }
    z.sort_by(lex_cmp);
    z
}

/// Integral over one period of a smooth 1-periodic function by the composite
/// trapezoid rule with interval doubling (spectrally accurate for analytic
/// integrands). Returns (value, error estimate) once two consecutive
/// doublings agree within abs_tol, or None if the budget runs out or the
/// integrand fails.
pub(crate) fn periodic_integral(
    f: &mut dyn FnMut(f64) -> Option<Complex64>,
    abs_tol: f64,
    max_points: usize,
) -> Option<(Complex64, f64)> {
    let mut n = 16usize;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n {
        sum += f(k as f64 / n as f64)?;
    }
    let mut value = sum / n as f64;
    let mut agreements = 0usize;
    let mut err = f64::INFINITY;
    while n < max_points {
        for k in 0..n {
            sum += f((2 * k + 1) as f64 / (2 * n) as f64)?;
        }
        n *= 2;
        let next = sum / n as f64;
        err = (next - value).norm();
        value = next;
        if err <= abs_tol {
            agreements += 1;
            if agreements >= 2 {
                return Some((value, err));
            }
        } else {
            agreements = 0;
        }
    }
    (err <= abs_tol).then_some((value, err))
}

/// Why an adaptive integration run stopped short of its endpoint.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum OdeStop {
    /// The derivative closure declined to evaluate (singular locus reached).
    DerivativeFailed { t: f64 },
    /// Error control pushed the step below representable resolution.
    StepUnderflow { t: f64 },
    /// Step budget exhausted before reaching the endpoint.
    BudgetExhausted,
}

const CASH_KARP_STAGES: [f64; 6] = [0.0, 0.2, 0.3, 0.6, 1.0, 0.875];
const CASH_KARP_A: [[f64; 5]; 5] = [
    [0.2, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0],
    [0.3, -0.9, 1.2, 0.0, 0.0],
    [-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0, 0.0],
    [
        1631.0 / 55296.0,
        175.0 / 512.0,
        575.0 / 13824.0,
        44275.0 / 110592.0,
        253.0 / 4096.0,
    ],
];
const CASH_KARP_B5: [f64; 6] =
    [37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0];
const CASH_KARP_B4: [f64; 6] = [
    2825.0 / 27648.0,
    0.0,
    18575.0 / 48384.0,
    13525.0 / 55296.0,
    277.0 / 14336.0,
    0.25,
];

/// Adaptive Cash-Karp RK45 over a small complex state vector, integrating
/// from t0 to t1 in either direction (y is updated in place). The derivative
/// closure fills dy and returns false where the field is undefined; the
/// local error per step is kept at or below tol·(1 + |y|∞).
pub(crate) fn rk45(
    f: &mut dyn FnMut(f64, &[Complex64], &mut [Complex64]) -> bool,
    t0: f64,
    t1: f64,
    y: &mut [Complex64],
    tol: f64,
    max_step: f64,
) -> Result<(), OdeStop> {
    let dim = y.len();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(());
    }
    let dir = span.signum();
    let mut t = t0;
    let mut h = (span.abs() / 16.0).min(max_step).max(1e-12) * dir;
    let t_floor = 1e-14 * t0.abs().max(t1.abs()).max(1.0);
    let mut k = vec![vec![Complex64::new(0.0, 0.0); dim]; 6];
    let mut stage = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..200_000 {
        if (t1 - t) * dir <= t_floor {
            return Ok(());
        }
        if (t1 - t) * dir < h.abs() {
            h = t1 - t;
        }
        let mut failed_at = None;
        for s in 0..6 {
            let ts = t + CASH_KARP_STAGES[s] * h;
            stage.copy_from_slice(y);
            if s > 0 {
                for (j, kj) in k.iter().enumerate().take(s) {
                    let w = CASH_KARP_A[s - 1][j] * h;
                    for (sv, kv) in stage.iter_mut().zip(kj) {
                        *sv += w * kv;
                    }
                }
            }
            if !f(ts, &stage, &mut k[s]) {
                failed_at = Some(ts);
                break;
            }
        }
        if let Some(ts) = failed_at {
            // Shrink toward the singular locus; give up when the step dies.
            h *= 0.25;
            if h.abs() < t_floor {
                return Err(OdeStop::DerivativeFailed { t: ts });
            }
            continue;
        }
        let mut err = 0.0f64;
        let mut scale = 1.0f64;
        for i in 0..dim {
            let mut hi = Complex64::new(0.0, 0.0);
            let mut lo = Complex64::new(0.0, 0.0);
            for s in 0..6 {
                hi += CASH_KARP_B5[s] * k[s][i];
                lo += CASH_KARP_B4[s] * k[s][i];
            }
            err = err.max((h * (hi - lo)).norm());
            scale = scale.max((y[i] + h * hi).norm());
        }
        let budget = tol * scale;
        if err <= budget {
            for i in 0..dim {
                let mut hi = Complex64::new(0.0, 0.0);
                for s in 0..6 {
                    hi += CASH_KARP_B5[s] * k[s][i];
                }
                y[i] += h * hi;
            }
            t += h;
            let grow = if err == 0.0 { 5.0 } else { (budget / err).powf(0.2).min(5.0) };
            h = (h * 0.9 * grow).clamp(-max_step, max_step);
        } else {
            h *= 0.9 * (budget / err).powf(0.2).max(0.2);
        }
        if h.abs() < t_floor {
            return Err(OdeStop::StepUnderflow { t });
        }
    }
    Err(OdeStop::BudgetExhausted)
}

/// Newton iteration on a scalar complex function with explicit derivative.
/// Returns None if it fails to reach |f| ≤ tol within max_iter steps.
pub(crate) fn newton(
    f: impl Fn(Complex64) -> (Complex64, Complex64),
    start: Complex64,
    tol: f64,
    max_iter: usize,
) -> Option<Complex64> {
    let mut z = start;
    for _ in 0..max_iter {
        let (val, deriv) = f(z);
        if val.norm() <= tol {
            return Some(z);
        }
        if deriv.norm() <= 1e-300 {
            return None;
        }
        let step = val / deriv;
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        z -= step;
    }
    let (val, _) = f(z);
    (val.norm() <= tol).then_some(z)
}
