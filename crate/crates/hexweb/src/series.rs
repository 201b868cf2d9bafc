//! Truncated power series for the transcendental coefficient functions that
//! appear in flat normal forms. Each generator turns a first-order ODE into
//! an explicit coefficient recurrence; the rational instantiations stay
//! exact, and the residual helpers re-substitute a truncation into its ODE
//! with full polynomial arithmetic as an independent route.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{FromPrimitive, One, Zero};
use thiserror::Error;

use crate::algebra::upoly::UPoly;
use crate::algebra::{rat, ratq, Rat};

/// Errors from series generation.
#[derive(Debug, Error)]
pub enum SeriesError {
    #[error(
        "coefficient recurrence hits a vanishing divisor at index {index} with a nonzero \
         source; the parameter lies on the resonant set"
    )]
    Resonance { index: usize },
}

/// Coefficient ring for the series recurrences: exact rationals or complex
/// floating point.
pub trait SeriesScalar:
    Clone
    + Zero
    + One
    + FromPrimitive
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> SeriesScalar for T where
    T: Clone
        + Zero
        + One
        + FromPrimitive
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

fn int<T: SeriesScalar>(k: i64) -> T {
    T::from_i64(k).expect("small integer embeds in the scalar type")
}

/// [A·B]_n over the available prefixes; absent coefficients count as zero,
/// negative orders give zero.
fn conv<T: SeriesScalar>(a: &[T], b: &[T], n: i64) -> T {
    let mut acc = T::zero();
    if n < 0 {
        return acc;
    }
    let n = n as usize;
    for i in 0..=n {
        let j = n - i;
        if i < a.len() && j < b.len() {
            acc = acc + a[i].clone() * b[j].clone();
        }
    }
    acc
}

/// [A·A']_n over the available prefix.
fn conv_deriv<T: SeriesScalar>(a: &[T], n: i64) -> T {
    let mut acc = T::zero();
    if n < 0 {
        return acc;
    }
    let n = n as usize;
    for i in 0..=n {
        let j = n - i;
        if i < a.len() && j + 1 < a.len() {
            acc = acc + a[i].clone() * int::<T>((j + 1) as i64) * a[j + 1].clone();
        }
    }
    acc
}

/// Coefficients of the solution of [12 + 2T² + 9TU]·U' = L(4 + 27U²) with
/// U(0) = u0, up to the given order. The bracket equals 12 at T = 0, so the
/// recurrence divisor 12(n+1) never vanishes.
pub fn u_series<T: SeriesScalar>(l: &T, u0: &T, order: usize) -> Vec<T> {
    let mut u = vec![u0.clone()];
    for n in 0..order {
        let ni = n as i64;
        let mut src = int::<T>(27) * l.clone() * conv(&u, &u, ni);
        if n == 0 {
            src = src + int::<T>(4) * l.clone();
        }
        if n >= 1 {
            src = src - int::<T>(2 * (ni - 1)) * u[n - 1].clone();
        }
        src = src - int::<T>(9) * conv_deriv(&u, ni - 1);
        u.push(src / int(12 * (ni + 1)));
    }
    u
}

/// Odd-series solution of (12V + 2T²V − 9T)·V' = L·V·(27 + 4V²) with the
/// nonzero slope V'(0) = (3 + 9L)/4. The order-n divisor is 9(1 + 3Ln);
/// where it vanishes against a nonzero source the recurrence has no
/// solution and the parameter is rejected.
pub fn v_series<T: SeriesScalar>(l: &T, order: usize) -> Result<Vec<T>, SeriesError> {
    let v1 = (int::<T>(3) + int::<T>(9) * l.clone()) / int::<T>(4);
    let mut v = vec![T::zero()];
    if order >= 1 {
        v.push(v1.clone());
    }
    for n in 2..=order {
        let ni = n as i64;
        // v_n·[12(n+1)v1 − 9n − 27L] = 4L[V³]_n − 12[VV']_n − 2[VV']_{n−2},
        // with the bracketed sums taken over already-known coefficients
        // (v0 = 0 removes every other occurrence of v_n and v_{n+1}).
        let divisor = int::<T>(12 * (ni + 1)) * v1.clone()
            - int::<T>(9 * ni)
            - int::<T>(27) * l.clone();
        let vsq: Vec<T> = (0..=ni).map(|m| conv(&v, &v, m)).collect();
        let src = int::<T>(4) * l.clone() * conv(&v, &vsq, ni)
            - int::<T>(12) * conv_deriv(&v, ni)
            - int::<T>(2) * conv_deriv(&v, ni - 2);
        if divisor.is_zero() {
            if src.is_zero() {
                v.push(T::zero());
                continue;
            }
            return Err(SeriesError::Resonance { index: n });
        }
        v.push(src / divisor);
    }
    Ok(v)
}

/// Solution of the V-equation with a double zero: V = a·T² + O(T³). The
/// order-2 balance forces L = −2/3 exactly (−18a = 27La), so L is not a
/// parameter; the order-n divisor 18 − 9n never vanishes for n ≥ 3.
pub fn v_series_double_zero<T: SeriesScalar>(a: &T, order: usize) -> Vec<T> {
    let l: T = -(int::<T>(2) / int::<T>(3));
    let mut v = vec![T::zero()];
    if order >= 1 {
        v.push(T::zero());
    }
    if order >= 2 {
        v.push(a.clone());
    }
    for n in 3..=order {
        let ni = n as i64;
        let vsq: Vec<T> = (0..=ni).map(|m| conv(&v, &v, m)).collect();
        let src = int::<T>(4) * l.clone() * conv(&v, &vsq, ni)
            - int::<T>(12) * conv_deriv(&v, ni)
            - int::<T>(2) * conv_deriv(&v, ni - 2);
        v.push(src / int(18 - 9 * ni));
    }
    v
}

/// Coefficients of 1/D for a series with D(0) ≠ 0.
pub fn series_recip<T: SeriesScalar>(d: &[T], order: usize) -> Vec<T> {
    let d0 = d[0].clone();
    let mut h = vec![T::one() / d0.clone()];
    for n in 1..=order {
        let mut acc = T::zero();
        for i in 1..=n {
            if i < d.len() {
                acc = acc + d[i].clone() * h[n - i].clone();
            }
        }
        h.push(-(acc / d0.clone()));
    }
    h
}

/// Coefficients of the solution of
/// [2(1−s) + 3s^{4+l0}(3s−1)W]·W' = ((5+l0)/2)·[3s^{3+l0}(2+3s)W + 4]·W
/// with W(0) = w0, up to the given order.
pub fn w_series<T: SeriesScalar>(l0: u32, w0: &T, order: usize) -> Vec<T> {
    let c: T = int::<T>(5 + i64::from(l0)) / int::<T>(2);
    let off = i64::from(l0);
    let mut w = vec![w0.clone()];
    for n in 0..order {
        let ni = n as i64;
        let mut src = (int::<T>(2 * ni) + int::<T>(4) * c.clone()) * w[n].clone();
        src = src + int::<T>(6) * c.clone() * conv(&w, &w, ni - 3 - off);
        src = src + int::<T>(9) * c.clone() * conv(&w, &w, ni - 4 - off);
        src = src + int::<T>(3) * conv_deriv(&w, ni - 4 - off);
        src = src - int::<T>(9) * conv_deriv(&w, ni - 5 - off);
        w.push(src / int(2 * (ni + 1)));
    }
    w
}

/// Taylor coefficients of b with b' = cl + loc·b², b(0) = b0, which covers
/// every scaled-tangent coefficient function: cl is the product of the
/// scale and the frequency, loc their quotient.
pub fn quadratic_riccati_series<T: SeriesScalar>(
    cl: &T,
    loc: &T,
    b0: &T,
    order: usize,
) -> Vec<T> {
    let mut b = vec![b0.clone()];
    for n in 0..order {
        let ni = n as i64;
        let mut src = loc.clone() * conv(&b, &b, ni);
        if n == 0 {
            src = src + cl.clone();
        }
        b.push(src / int(ni + 1));
    }
    b
}

/// Exact coefficients of b(x) = (2/(3√3))·tan(√3·ell·x + L1) under the
/// rational slice tan(L1) = 3√3·q1, where every coefficient lands in ℚ:
/// b' = (2ell/3) + (9ell/2)·b² with b(0) = 2·q1.
pub fn tan_series_rational(ell: &Rat, q1: &Rat, order: usize) -> Vec<Rat> {
    let cl = ratq(2, 3) * ell;
    let loc = ratq(9, 2) * ell;
    let b0 = rat(2) * q1;
    quadratic_riccati_series(&cl, &loc, &b0, order)
}

/// Maclaurin coefficients of z·cot(z), from z·g' = g − g² − z² with g(0)=1.
pub fn z_cot_series(order: usize) -> Vec<Rat> {
    let mut g = vec![rat(1)];
    for n in 1..=order {
        let mut src = rat(0);
        for i in 1..n {
            src -= &g[i] * &g[n - i];
        }
        if n == 2 {
            src -= rat(1);
        }
        g.push(src / rat((n + 1) as i64));
    }
    g
}

fn upoly_from(coeffs: &[Rat]) -> UPoly {
    UPoly::new(coeffs.to_vec())
}

fn monomial(k: usize, c: Rat) -> UPoly {
    let mut v = vec![Rat::zero(); k + 1];
    v[k] = c;
    UPoly::new(v)
}

/// Residual coefficients 0..len−1 of a truncation substituted into the
/// U-equation, using full polynomial arithmetic. All but the last are zero
/// for a series produced by `u_series`.
pub fn u_ode_residual(l: &Rat, u: &[Rat]) -> Vec<Rat> {
    let up = upoly_from(u);
    let dup = up.derivative();
    let bracket = upoly_from(&[rat(12), rat(0), rat(2)]).add(&monomial(1, rat(9)).mul(&up));
    let rhs = upoly_from(&[rat(4)]).add(&up.mul(&up).scale(&rat(27))).scale(l);
    let res = bracket.mul(&dup).sub(&rhs);
    (0..u.len()).map(|k| res.coeff(k)).collect()
}

/// Residual coefficients 0..len−1 of a truncation substituted into the
/// V-equation.
pub fn v_ode_residual(l: &Rat, v: &[Rat]) -> Vec<Rat> {
    let vp = upoly_from(v);
    let dvp = vp.derivative();
    let bracket = upoly_from(&[rat(12), rat(0), rat(2)])
        .mul(&vp)
        .sub(&monomial(1, rat(9)));
    let rhs = vp
        .scale(&rat(27))
        .add(&vp.mul(&vp).mul(&vp).scale(&rat(4)))
        .scale(l);
    let res = bracket.mul(&dvp).sub(&rhs);
    (0..v.len()).map(|k| res.coeff(k)).collect()
}

/// Residual coefficients 0..len−1 of a truncation substituted into the
/// W-equation.
pub fn w_ode_residual(l0: u32, w: &[Rat]) -> Vec<Rat> {
    let c = ratq(5 + i64::from(l0), 2);
    let wp = upoly_from(w);
    let dwp = wp.derivative();
    let bracket = upoly_from(&[rat(2), rat(-2)]).add(
        &monomial(4 + l0 as usize, rat(1))
            .mul(&upoly_from(&[rat(-3), rat(9)]))
            .mul(&wp),
    );
    let rhs = monomial(3 + l0 as usize, rat(1))
        .mul(&upoly_from(&[rat(6), rat(9)]))
        .mul(&wp)
        .add(&upoly_from(&[rat(4)]))
        .mul(&wp)
        .scale(&c);
    let res = bracket.mul(&dwp).sub(&rhs);
    (0..w.len()).map(|k| res.coeff(k)).collect()
}

/// Residual coefficients 0..len−1 of a truncation substituted into
/// b' = cl + loc·b².
pub fn riccati_residual(cl: &Rat, loc: &Rat, b: &[Rat]) -> Vec<Rat> {
    let bp = upoly_from(b);
    let res = bp
        .derivative()
        .sub(&upoly_from(&[cl.clone()]))
        .sub(&bp.mul(&bp).scale(loc));
    (0..b.len()).map(|k| res.coeff(k)).collect()
}
