//! Gauss hypergeometric function 2F1 on the unit disk. Three evaluation
//! routes: a finite sum when the series terminates, a direct power series
//! inside |z| <= 0.8, and the standard two-term connection toward 1-z when
//! the argument sits near 1. The connection degenerates when c-a-b is an
//! integer; that case is reported as out of domain and callers recover by
//! perturbing parameters (the Legendre layer does this with a circle
//! average in the order).

use super::gamma::complex_gamma;
use super::SpecialError;
use num_complex::Complex64;

const SERIES_RADIUS: f64 = 0.8;
const SERIES_CAP: usize = 4000;
const INT_EPS: f64 = 1e-12;
const DEGENERATE_EPS: f64 = 1e-6;

/// Nearest integer to z when z is within eps of one, in both components.
fn near_int(z: Complex64, eps: f64) -> Option<i64> {
    let n = z.re.round();
    if (z.re - n).abs() <= eps && z.im.abs() <= eps && n.abs() < 1e15 {
        Some(n as i64)
    } else {
        None
    }
}

/// Termination index: the series stops at k = n when the parameter is -n.
fn termination_index(p: Complex64) -> Option<usize> {
    match near_int(p, INT_EPS) {
        Some(n) if n <= 0 => Some((-n) as usize),
        _ => None,
    }
}

/// Plain power series, valid for |z| < 1; converges fast for |z| <= 0.8.
/// `stop` caps the summation for terminating cases.
fn gauss_series(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z: Complex64,
    stop: Option<usize>,
) -> Result<Complex64, SpecialError> {
    let one = Complex64::new(1.0, 0.0);
    let mut term = one;
    let mut sum = one;
    let mut small_streak = 0u32;
    let cap = stop.unwrap_or(SERIES_CAP);
    for k in 0..cap {
        let kf = k as f64;
        term = term * (a + kf) * (b + kf) * z / ((c + kf) * (kf + 1.0));
        sum += term;
        if stop.is_none() {
            if term.norm() <= 1e-17 * sum.norm().max(1e-300) {
                small_streak += 1;
                if small_streak >= 2 {
                    return Ok(sum);
                }
            } else {
                small_streak = 0;
            }
        }
    }
    if stop.is_some() {
        Ok(sum)
    } else {
        Err(SpecialError::OutOfDomain {
            what: format!("hypergeometric series did not converge at z = {z}"),
        })
    }
}

/// 2F1(a, b; c; z).
///
/// Errors with `ParameterPole` when c is a non-positive integer that the
/// series reaches before terminating, and with `OutOfDomain` outside the
/// covered argument region (|z| <= 0.8 or |1-z| <= 0.8) or when the 1-z
/// connection degenerates (integer c-a-b).
pub fn hyp2f1(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    z: Complex64,
) -> Result<Complex64, SpecialError> {
    let term_a = termination_index(a);
    let term_b = termination_index(b);
    let stop = match (term_a, term_b) {
        (Some(n), Some(m)) => Some(n.min(m)),
        (Some(n), None) => Some(n),
        (None, Some(m)) => Some(m),
        (None, None) => None,
    };
    if let Some(cn) = termination_index(c) {
        // c = -cn: the denominator (c + k) vanishes at k = cn. Safe only if
        // the numerator kills the series strictly earlier.
        match stop {
            Some(n) if n <= cn => {}
            _ => return Err(SpecialError::ParameterPole { c }),
        }
    }
    if let Some(n) = stop {
        return gauss_series(a, b, c, z, Some(n));
    }
    if z.norm() <= SERIES_RADIUS {
        return gauss_series(a, b, c, z, None);
    }
    let w = Complex64::new(1.0, 0.0) - z;
    if w.norm() <= SERIES_RADIUS {
        let s = c - a - b;
        if near_int(s, DEGENERATE_EPS).is_some() {
            return Err(SpecialError::OutOfDomain {
                what: format!("degenerate 1-z connection: c-a-b = {s} is nearly integer"),
            });
        }
        let f1 = gauss_series(a, b, a + b - c + 1.0, w, None)?;
        let f2 = gauss_series(c - a, c - b, s + 1.0, w, None)?;
        let g = |x: Complex64| complex_gamma(x);
        let coeff1 = g(c) * g(s) / (g(c - a) * g(c - b));
        let coeff2 = g(c) * g(-s) / (g(a) * g(b));
        return Ok(coeff1 * f1 + coeff2 * w.powc(s) * f2);
    }
    Err(SpecialError::OutOfDomain {
        what: format!("argument {z} outside the covered region"),
    })
}
