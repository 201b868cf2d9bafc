//! Univariate polynomials over the rationals: exact division, gcd, and
//! square-free decomposition. Degrees stay small (a handful), so classical
//! algorithms are used throughout.

use num_traits::Zero;

use super::rat::Rat;

/// Dense univariate polynomial, ascending coefficients, no trailing zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct UPoly {
    coeffs: Vec<Rat>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn zero() -> Self {
        UPoly { coeffs: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rat {
        self.coeffs.get(k).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn leading(&self) -> Option<&Rat> {
        self.coeffs.last()
    }

    pub fn monic(&self) -> UPoly {
        match self.leading() {
            None => UPoly::zero(),
            Some(l) => {
                let inv = l.clone().recip();
                UPoly::new(self.coeffs.iter().map(|c| c * &inv).collect())
            }
        }
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rat::from_integer(k.into()))
                .collect(),
        )
    }

    /// Euclidean division: self = q·d + r with deg r < deg d. Panics on d = 0.
    pub fn divrem(&self, d: &UPoly) -> (UPoly, UPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead_inv = d.leading().expect("nonzero").clone().recip();
        let mut r = self.coeffs.clone();
        let mut q = vec![Rat::zero(); self.coeffs.len().saturating_sub(dd)];
        while r.len() > dd {
            let top = r.len() - 1;
            let factor = r[top].clone() * &lead_inv;
            if !factor.is_zero() {
                let shift = top - dd;
                q[shift] = factor.clone();
                for (k, dc) in d.coeffs.iter().enumerate() {
                    r[shift + k] = &r[shift + k] - &(dc * &factor);
                }
            }
            r.pop();
            while r.last().map_or(false, |c| c.is_zero()) {
                r.pop();
            }
        }
        (UPoly::new(q), UPoly::new(r))
    }

    /// Exact quotient; panics if the division leaves a remainder.
    pub fn div_exact(&self, d: &UPoly) -> UPoly {
        let (q, r) = self.divrem(d);
        assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    pub fn mul(&self, other: &UPoly) -> UPoly {
        if self.is_zero() || other.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UPoly::new(out)
    }

    pub fn add(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(&self.coeff(k) + &other.coeff(k));
        }
        UPoly::new(out)
    }

    pub fn sub(&self, other: &UPoly) -> UPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(&self.coeff(k) - &other.coeff(k));
        }
        UPoly::new(out)
    }

    pub fn scale(&self, c: &Rat) -> UPoly {
        UPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn eval(&self, s: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }
}

/// Monic gcd by the Euclidean algorithm.
pub fn gcd(a: &UPoly, b: &UPoly) -> UPoly {
    let mut a = a.clone();
    let mut b = b.clone();
    while !b.is_zero() {
        let (_, r) = a.divrem(&b);
        a = b;
        b = r;
    }
    a.monic()
}

/// Yun's square-free decomposition: returns pairs (factor, multiplicity) with
/// the factors monic, square-free, pairwise coprime, and of degree ≥ 1;
/// the product ∏ factor^multiplicity equals the input up to a constant.
pub fn square_free_decomposition(p: &UPoly) -> Vec<(UPoly, u32)> {
    let mut out = Vec::new();
    if p.degree().unwrap_or(0) == 0 {
        return out;
    }
    let dp = p.derivative();
    let g = gcd(p, &dp);
    if g.degree() == Some(0) {
        out.push((p.monic(), 1));
        return out;
    }
    let mut w = p.div_exact(&g);
    let mut y = dp.div_exact(&g);
    let mut z = y.sub(&w.derivative());
    let mut mult = 1u32;
    while w.degree().unwrap_or(0) > 0 {
        let f = gcd(&w, &z);
        if f.degree().unwrap_or(0) > 0 {
            out.push((f.clone(), mult));
        }
        w = w.div_exact(&f);
        y = z.div_exact(&f);
        z = y.sub(&w.derivative());
        mult += 1;
    }
    out
}

/// Maximal multiplicity among the roots (1 for square-free, 0 for constants).
pub fn max_root_multiplicity(p: &UPoly) -> u32 {
    square_free_decomposition(p).iter().map(|(_, m)| *m).max().unwrap_or(0)
}
