//! Rational functions in (x, y): quotients of `Poly2` with a normalized
//! representation and cross-multiplication equality.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{Signed, Zero};

use super::poly::Poly2;
use super::rat::{rat, Rat};
use super::{AlgebraError, Var};
use crate::tol;

/// num/den with den not identically zero. The representation is normalized
/// by the common monomial factor and by the denominator's content, with the
/// denominator's graded-lex leading coefficient positive; full polynomial
/// gcd reduction is deliberately absent, so equality goes through
/// cross-multiplication instead of representation comparison.
#[derive(Clone)]
pub struct RatFn {
    num: Poly2,
    den: Poly2,
}

impl RatFn {
    pub fn new(num: Poly2, den: Poly2) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZeroFunction);
        }
        let mut f = RatFn { num, den };
        f.normalize();
        Ok(f)
    }

    pub fn zero() -> Self {
        RatFn { num: Poly2::zero(), den: Poly2::one() }
    }

    pub fn one() -> Self {
        RatFn { num: Poly2::one(), den: Poly2::one() }
    }

    pub fn constant(c: Rat) -> Self {
        RatFn { num: Poly2::constant(c), den: Poly2::one() }
    }

    pub fn num(&self) -> &Poly2 {
        &self.num
    }

    pub fn den(&self) -> &Poly2 {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True when the denominator is (syntactically) the constant 1.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = Poly2::one();
            return;
        }
        // Common monomial factor of numerator and denominator.
        let i = self.num.min_deg_x().unwrap().min(self.den.min_deg_x().unwrap());
        let j = self.num.min_deg_y().unwrap().min(self.den.min_deg_y().unwrap());
        if i > 0 || j > 0 {
            self.num = self.num.divide_by_monomial(i, j);
            self.den = self.den.divide_by_monomial(i, j);
        }
        // Scale so the denominator has coprime integer coefficients and a
        // positive graded-lex leading coefficient; the scale lands on the
        // numerator, whose coefficients stay rational.
        let mut scale = self.den.content().unwrap();
        if self.den.leading().unwrap().2.is_negative() {
            scale = -scale;
        }
        let inv = scale.recip();
        self.den = self.den.scale(&inv);
        self.num = self.num.scale(&inv);
    }

    /// Semantic equality by cross-multiplication: num1*den2 == num2*den1.
    pub fn equals(&self, other: &RatFn) -> bool {
        &self.num * &other.den == &other.num * &self.den
    }

    /// Exact reciprocal; error when self is zero.
    pub fn recip(&self) -> Result<RatFn, AlgebraError> {
        RatFn::new(self.den.clone(), self.num.clone())
    }

    /// Integer power; negative exponents go through the reciprocal.
    pub fn pow(&self, n: i32) -> Result<RatFn, AlgebraError> {
        let base = if n < 0 { self.recip()? } else { self.clone() };
        let mut acc = RatFn::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    /// Exact partial derivative by the quotient rule.
    pub fn diff(&self, var: Var) -> RatFn {
        if self.is_polynomial() {
            return RatFn { num: self.num.diff(var), den: Poly2::one() };
        }
        let num = &self.num.diff(var) * &self.den - &self.num * &self.den.diff(var);
        let den = &self.den * &self.den;
        RatFn::new(num, den).expect("square of a nonzero denominator is nonzero")
    }

    /// Floating evaluation; a pole is reported when |den| < `tol::POLE`.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Result<Complex64, AlgebraError> {
        let d = self.den.eval(x, y);
        if d.norm() < tol::POLE {
            return Err(AlgebraError::PoleAtPoint { x: x.re, y: y.re, tol: tol::POLE });
        }
        Ok(self.num.eval(x, y) / d)
    }

    /// Exact evaluation at a rational point; None at a denominator zero.
    pub fn eval_rat(&self, x: &Rat, y: &Rat) -> Option<Rat> {
        let d = self.den.eval_rat(x, y);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval_rat(x, y) / d)
    }

    /// Some(c) iff the function is identically the constant c. Decided
    /// exactly: a candidate value is read off at a grid point where the
    /// denominator does not vanish, then num - c*den == 0 is checked.
    pub fn constant_value(&self) -> Option<Rat> {
        if self.num.is_zero() {
            return Some(rat(0));
        }
        let span = (self.den.degree().unwrap_or(0) + 2) as i64;
        for a in 0..span {
            for b in 0..span {
                let (px, py) = (rat(a), rat(b));
                if let Some(c) = self.eval_rat(&px, &py) {
                    let residue = &self.num - &self.den.scale(&c);
                    return if residue.is_zero() { Some(c) } else { None };
                }
            }
        }
        // A nonzero denominator of degree d cannot vanish on a full
        // (d+2) x (d+2) grid, so this is unreachable.
        unreachable!("denominator vanished on a grid larger than its degree")
    }
}

impl From<Poly2> for RatFn {
    fn from(p: Poly2) -> Self {
        RatFn { num: p, den: Poly2::one() }
    }
}

impl PartialEq for RatFn {
    /// Cross-multiplication equality (semantic, not representational).
    fn eq(&self, other: &Self) -> bool {
        self.equals(other)
    }
}

impl Add for &RatFn {
    type Output = RatFn;
    fn add(self, rhs: &RatFn) -> RatFn {
        let num = &self.num * &rhs.den + &rhs.num * &self.den;
        let den = &self.den * &rhs.den;
        RatFn::new(num, den).expect("product of nonzero denominators is nonzero")
    }
}

impl Sub for &RatFn {
    type Output = RatFn;
    fn sub(self, rhs: &RatFn) -> RatFn {
        self + &(-rhs)
    }
}

impl Mul for &RatFn {
    type Output = RatFn;
    fn mul(self, rhs: &RatFn) -> RatFn {
        let num = &self.num * &rhs.num;
        let den = &self.den * &rhs.den;
        RatFn::new(num, den).expect("product of nonzero denominators is nonzero")
    }
}

impl Div for &RatFn {
    type Output = RatFn;
    fn div(self, rhs: &RatFn) -> RatFn {
        let inv = rhs.recip().expect("division by the zero rational function");
        self * &inv
    }
}

impl Neg for &RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -&self.num, den: self.den.clone() }
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        -&self
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for RatFn {
            type Output = RatFn;
            fn $method(self, rhs: RatFn) -> RatFn {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&RatFn> for RatFn {
            type Output = RatFn;
            fn $method(self, rhs: &RatFn) -> RatFn {
                $trait::$method(&self, rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl fmt::Display for RatFn {
    /// `num` when the denominator is 1, `(num)/(den)` otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_polynomial() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl fmt::Debug for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
