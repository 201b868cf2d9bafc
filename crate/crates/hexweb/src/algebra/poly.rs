//! Sparse bivariate polynomials over the rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rat::{rat, to_c64, Rat};
use super::Var;

/// Exponents above this abort the computation. Exact pipelines in this crate
/// never legitimately reach it, so crossing the cap means runaway symbolic
/// growth and panicking beats grinding the machine to a halt.
pub const EXPONENT_CAP: u32 = 512;

/// Sparse polynomial in (x, y) with rational coefficients, keyed by the
/// exponent pair. Zero coefficients are never stored, so two polynomials are
/// equal exactly when their term maps are equal.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), Rat>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2 { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Poly2::constant(rat(1))
    }

    pub fn constant(c: Rat) -> Self {
        Poly2::monomial(0, 0, c)
    }

    /// The variable x.
    pub fn var_x() -> Self {
        Poly2::monomial(1, 0, rat(1))
    }

    /// The variable y.
    pub fn var_y() -> Self {
        Poly2::monomial(0, 1, rat(1))
    }

    /// c * x^i * y^j.
    pub fn monomial(i: u32, j: u32, c: Rat) -> Self {
        check_cap(i, j);
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        Poly2 { terms }
    }

    /// Builds from (x-exponent, y-exponent, coefficient) triples, merging
    /// duplicates and dropping zeros.
    pub fn from_terms<I: IntoIterator<Item = (u32, u32, Rat)>>(iter: I) -> Self {
        let mut p = Poly2::zero();
        for (i, j, c) in iter {
            p.add_term(i, j, c);
        }
        p
    }

    /// Adds c*x^i*y^j in place, keeping the no-zero-coefficients invariant.
    pub fn add_term(&mut self, i: u32, j: u32, c: Rat) {
        if c.is_zero() {
            return;
        }
        check_cap(i, j);
        use std::collections::btree_map::Entry;
        match self.terms.entry((i, j)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get() + &c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 0)).map_or(false, |c| c.is_one())
    }

    /// Coefficient of x^i y^j (zero when absent).
    pub fn coeff(&self, i: u32, j: u32) -> Rat {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(|| rat(0))
    }

    /// Some(c) iff the polynomial is the constant c (including zero).
    pub fn constant_value(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(rat(0)),
            1 => self.terms.get(&(0, 0)).cloned(),
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates terms as (x-exponent, y-exponent, coefficient).
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, &Rat)> {
        self.terms.iter().map(|(&(i, j), c)| (i, j, c))
    }

    /// Total degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn deg_x(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn deg_y(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    /// Smallest x-exponent appearing (None for zero).
    pub fn min_deg_x(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).min()
    }

    /// Smallest y-exponent appearing (None for zero).
    pub fn min_deg_y(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).min()
    }

    /// Leading term in graded-lex order (total degree first, then x before
    /// y). This fixes the deterministic printing and sign conventions.
    pub fn leading(&self) -> Option<(u32, u32, &Rat)> {
        self.terms
            .iter()
            .max_by_key(|(&(i, j), _)| (i + j, i))
            .map(|(&(i, j), c)| (i, j, c))
    }

    /// Positive rational c with self/c having coprime integer coefficients.
    /// None for the zero polynomial.
    pub fn content(&self) -> Option<Rat> {
        if self.is_zero() {
            return None;
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(&c.numer().abs());
            den_lcm = den_lcm.lcm(c.denom());
        }
        Some(Rat::new(num_gcd, den_lcm))
    }

    /// Multiplies every coefficient by c.
    pub fn scale(&self, c: &Rat) -> Poly2 {
        if c.is_zero() {
            return Poly2::zero();
        }
        Poly2 {
            terms: self.terms.iter().map(|(&e, v)| (e, v * c)).collect(),
        }
    }

    /// Exact division by x^i y^j. Panics if any term has smaller exponents;
    /// callers establish divisibility via `min_deg_x`/`min_deg_y`.
    pub fn divide_by_monomial(&self, i: u32, j: u32) -> Poly2 {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| {
                    assert!(a >= i && b >= j, "monomial division is not exact");
                    ((a - i, b - j), c.clone())
                })
                .collect(),
        }
    }

    /// Multiplies by x^i y^j.
    pub fn mul_monomial(&self, i: u32, j: u32) -> Poly2 {
        Poly2 {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b), c)| {
                    check_cap(a + i, b + j);
                    ((a + i, b + j), c.clone())
                })
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly2 {
        let mut acc = Poly2::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Exact partial derivative.
    pub fn diff(&self, var: Var) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i, j), c) in &self.terms {
            match var {
                Var::X if i > 0 => out.add_term(i - 1, j, c * rat(i as i64)),
                Var::Y if j > 0 => out.add_term(i, j - 1, c * rat(j as i64)),
                _ => {}
            }
        }
        out
    }

    /// Nested Horner evaluation (outer in x, inner in y); the fixed scheme
    /// keeps results independent of term-insertion history.
    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut by_x: BTreeMap<u32, Vec<(u32, &Rat)>> = BTreeMap::new();
        for (&(i, j), c) in &self.terms {
            by_x.entry(i).or_default().push((j, c));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        let mut prev_i: Option<u32> = None;
        for (&i, row) in by_x.iter().rev() {
            if let Some(pi) = prev_i {
                acc *= x.powu(pi - i);
            }
            acc += horner_y(row, y);
            prev_i = Some(i);
        }
        if let Some(pi) = prev_i {
            acc *= x.powu(pi);
        }
        acc
    }

    /// Exact evaluation at a rational point.
    pub fn eval_rat(&self, x: &Rat, y: &Rat) -> Rat {
        let mut acc = rat(0);
        for (&(i, j), c) in &self.terms {
            acc += c * pow_rat(x, i) * pow_rat(y, j);
        }
        acc
    }
}

fn check_cap(i: u32, j: u32) {
    assert!(
        i <= EXPONENT_CAP && j <= EXPONENT_CAP,
        "exponent ({i},{j}) exceeds cap {EXPONENT_CAP}: runaway symbolic growth"
    );
}

fn pow_rat(base: &Rat, n: u32) -> Rat {
    let mut acc = rat(1);
    for _ in 0..n {
        acc *= base;
    }
    acc
}

fn horner_y(row: &[(u32, &Rat)], y: Complex64) -> Complex64 {
    // Rows arrive sorted by ascending y-exponent (BTreeMap iteration order).
    let mut acc = Complex64::new(0.0, 0.0);
    let mut prev_j: Option<u32> = None;
    for &(j, c) in row.iter().rev() {
        if let Some(pj) = prev_j {
            acc *= y.powu(pj - j);
        }
        acc += to_c64(c);
        prev_j = Some(j);
    }
    if let Some(pj) = prev_j {
        acc *= y.powu(pj);
    }
    acc
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, c.clone());
        }
        out
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (&(i, j), c) in &rhs.terms {
            out.add_term(i, j, -c.clone());
        }
        out
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(i1, j1), c1) in &self.terms {
            for (&(i2, j2), c2) in &rhs.terms {
                out.add_term(i1 + i2, j1 + j2, c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|(&e, c)| (e, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Poly2 {
            type Output = Poly2;
            fn $method(self, rhs: Poly2) -> Poly2 {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&Poly2> for Poly2 {
            type Output = Poly2;
            fn $method(self, rhs: &Poly2) -> Poly2 {
                $trait::$method(&self, rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        -&self
    }
}

impl fmt::Display for Poly2 {
    /// Canonical rendering: graded-lex descending, `*` explicit, exponents
    /// with `^`. Examples: `4*x^3 + 27*y^2`, `-x + 1/2`. Byte-deterministic.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut keys: Vec<(u32, u32)> = self.terms.keys().cloned().collect();
        keys.sort_by_key(|&(i, j)| (std::cmp::Reverse(i + j), std::cmp::Reverse(i)));
        for (idx, &(i, j)) in keys.iter().enumerate() {
            let c = &self.terms[&(i, j)];
            let neg = c.is_negative();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let mono = monomial_string(i, j);
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{mag}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn monomial_string(i: u32, j: u32) -> String {
    let mut parts = Vec::new();
    match i {
        0 => {}
        1 => parts.push("x".to_string()),
        _ => parts.push(format!("x^{i}")),
    }
    match j {
        0 => {}
        1 => parts.push("y".to_string()),
        _ => parts.push(format!("y^{j}")),
    }
    parts.join("*")
}
