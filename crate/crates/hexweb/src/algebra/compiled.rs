//! Compiled complex evaluators. Exact objects carry `BigRational`
//! coefficients, which is far too slow inside quadrature and tracing loops;
//! compiling once to `Complex64` term lists makes pointwise evaluation cheap.

use num_complex::Complex64;

use super::poly::Poly2;
use super::rat::to_c64;
use super::ratfn::RatFn;
use super::forms::OneForm;

/// Term list (i, j, c) for c * x^i * y^j with float coefficients.
#[derive(Clone, Debug)]
pub struct CPoly {
    terms: Vec<(u32, u32, Complex64)>,
}

impl CPoly {
    pub fn compile(p: &Poly2) -> Self {
        CPoly { terms: p.iter().map(|(i, j, c)| (i, j, to_c64(c))).collect() }
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(i, j, c) in &self.terms {
            acc += c * x.powu(i) * y.powu(j);
        }
        acc
    }

    /// Largest |coefficient|, used for relative near-zero thresholds.
    pub fn coeff_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.2.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Compiled rational function. Callers decide how to treat small
/// denominators; `eval` returns the raw quotient.
#[derive(Clone, Debug)]
pub struct CRatFn {
    pub num: CPoly,
    pub den: CPoly,
}

impl CRatFn {
    pub fn compile(f: &RatFn) -> Self {
        CRatFn { num: CPoly::compile(f.num()), den: CPoly::compile(f.den()) }
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.num.eval(x, y) / self.den.eval(x, y)
    }

    pub fn den_abs(&self, x: Complex64, y: Complex64) -> f64 {
        self.den.eval(x, y).norm()
    }
}

/// Compiled 1-form for fast pairing with tangents along paths.
#[derive(Clone, Debug)]
pub struct COneForm {
    pub dx: CRatFn,
    pub dy: CRatFn,
}

impl COneForm {
    pub fn compile(w: &OneForm) -> Self {
        COneForm { dx: CRatFn::compile(&w.dx), dy: CRatFn::compile(&w.dy) }
    }

    /// Pairing with a tangent (vx, vy) at a point.
    pub fn pair(&self, x: Complex64, y: Complex64, vx: Complex64, vy: Complex64) -> Complex64 {
        self.dx.eval(x, y) * vx + self.dy.eval(x, y) * vy
    }
}
