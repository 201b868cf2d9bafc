//! Differential forms with rational-function coefficients and the binary
//! forms attached to cubic/quartic direction fields.

use std::fmt;
use std::ops::{Add, Sub};

use num_complex::Complex64;

use super::poly::Poly2;
use super::ratfn::RatFn;
use super::{AlgebraError, Var};

/// P dx + Q dy with rational-function components.
#[derive(Clone, PartialEq)]
pub struct OneForm {
    /// Coefficient of dx.
    pub dx: RatFn,
    /// Coefficient of dy.
    pub dy: RatFn,
}

impl OneForm {
    pub fn zero() -> Self {
        OneForm { dx: RatFn::zero(), dy: RatFn::zero() }
    }

    pub fn new(dx: RatFn, dy: RatFn) -> Self {
        OneForm { dx, dy }
    }

    pub fn is_zero(&self) -> bool {
        self.dx.is_zero() && self.dy.is_zero()
    }

    /// Pairing with a vector field (xi, eta): P*xi + Q*eta.
    pub fn pair(&self, xi: &RatFn, eta: &RatFn) -> RatFn {
        &(&self.dx * xi) + &(&self.dy * eta)
    }

    /// Componentwise floating evaluation.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Result<(Complex64, Complex64), AlgebraError> {
        Ok((self.dx.eval(x, y)?, self.dy.eval(x, y)?))
    }

    /// d(f)/f for a nonzero rational function f: the logarithmic differential
    /// (f_x/f) dx + (f_y/f) dy.
    pub fn d_log(f: &RatFn) -> Result<Self, AlgebraError> {
        let finv = f.recip()?;
        Ok(OneForm { dx: &f.diff(Var::X) * &finv, dy: &f.diff(Var::Y) * &finv })
    }
}

impl Add for &OneForm {
    type Output = OneForm;
    fn add(self, rhs: &OneForm) -> OneForm {
        OneForm { dx: &self.dx + &rhs.dx, dy: &self.dy + &rhs.dy }
    }
}

impl Sub for &OneForm {
    type Output = OneForm;
    fn sub(self, rhs: &OneForm) -> OneForm {
        OneForm { dx: &self.dx - &rhs.dx, dy: &self.dy - &rhs.dy }
    }
}

impl fmt::Display for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) dx + ({}) dy", self.dx, self.dy)
    }
}

impl fmt::Debug for OneForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// R dx∧dy.
#[derive(Clone, PartialEq)]
pub struct TwoForm {
    /// Coefficient of dx∧dy.
    pub dxdy: RatFn,
}

impl TwoForm {
    pub fn is_zero(&self) -> bool {
        self.dxdy.is_zero()
    }
}

impl fmt::Display for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) dx^dy", self.dxdy)
    }
}

impl fmt::Debug for TwoForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// d(P dx + Q dy) = (Q_x − P_y) dx∧dy, exactly.
pub fn exterior_derivative(w: &OneForm) -> TwoForm {
    TwoForm { dxdy: &w.dy.diff(Var::X) - &w.dx.diff(Var::Y) }
}

/// Homogeneous form of degree 3 or 4 in the direction covector (dy, dx).
/// `coeffs[m]` is the coefficient of dy^(degree−m) dx^m, stored WITHOUT
/// binomial weights; consumers that want the classical a4..a0 normalization
/// (quartic = a4 dy^4 + 4 a3 dy^3 dx + 6 a2 dy^2 dx^2 + 4 a1 dy dx^3 + a0 dx^4)
/// divide the weights out themselves.
#[derive(Clone, PartialEq, Debug)]
pub struct BinaryForm {
    pub coeffs: Vec<Poly2>,
}

impl BinaryForm {
    pub fn new(coeffs: Vec<Poly2>) -> Self {
        assert!(
            coeffs.len() == 4 || coeffs.len() == 5,
            "binary forms here have degree 3 or 4"
        );
        BinaryForm { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficient of dy^k dx^(degree−k).
    pub fn coeff_dy_pow(&self, k: usize) -> &Poly2 {
        &self.coeffs[self.degree() - k]
    }

    /// Multiplies a cubic by the 1-form u dy + v dx, producing the quartic
    /// with raw (unweighted) coefficients.
    pub fn mul_linear(&self, u: &Poly2, v: &Poly2) -> BinaryForm {
        assert_eq!(self.degree(), 3, "only cubic x linear products are needed");
        let mut out = vec![Poly2::zero(); 5];
        for (m, c) in self.coeffs.iter().enumerate() {
            // c * u: dy-degree rises by one, so the dx-index m is unchanged.
            out[m] = &out[m] + &(c * u);
            out[m + 1] = &out[m + 1] + &(c * v);
        }
        BinaryForm::new(out)
    }
}
