//! Infinitesimal symmetries of cubic webs: Lie prolongation to the jet
//! variable p, the symmetry residual modulo the defining equation, inference
//! of quasihomogeneous weights, Euler fields, and monomial substitutions
//! x = m·x̄^α, y = l·ȳ^β.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::algebra::{rat, rat_pow, OneForm, Poly2, Rat, RatFn, Var};
use crate::webform::{render_p_polynomial, CubicODE, ReducedODE, WebError};

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error("cannot divide by the equation: its degree in p is less than 1")]
    LeadingCoefficientZero,
    #[error("substitution produces non-integer exponents in: {}", offenders.join(", "))]
    NonIntegerExponents { offenders: Vec<String> },
    #[error("invalid substitution: {0}")]
    InvalidSubstitution(String),
    #[error("invalid vector field: {0}")]
    InvalidField(String),
    #[error(transparent)]
    Web(#[from] WebError),
}

/// Plane vector field X = ξ∂x + η∂y with rational-function components.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneVectorField {
    pub xi: RatFn,
    pub eta: RatFn,
}

impl PlaneVectorField {
    /// Components must be finite at the origin (germ of a field there).
    pub fn new(xi: RatFn, eta: RatFn) -> Result<Self, SymmetryError> {
        let zero = rat(0);
        if xi.den().coeff(0, 0) == zero || eta.den().coeff(0, 0) == zero {
            return Err(SymmetryError::InvalidField(
                "a component has a pole at the origin".into(),
            ));
        }
        Ok(PlaneVectorField { xi, eta })
    }

    /// The Euler field wx·x ∂x + wy·y ∂y.
    pub fn euler(wx: &Rat, wy: &Rat) -> Self {
        PlaneVectorField {
            xi: RatFn::from(Poly2::monomial(1, 0, wx.clone())),
            eta: RatFn::from(Poly2::monomial(0, 1, wy.clone())),
        }
    }
}

impl fmt::Display for PlaneVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})*d_x + ({})*d_y", self.xi, self.eta)
    }
}

/// Weight kind of an Euler field: one zero weight, opposite signs, or equal
/// signs. Singular webs fall into these three classes by their symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightKind {
    Parabolic,
    Hyperbolic,
    Elliptic,
}

/// Projective weight vector [wx : wy] of a quasihomogeneous web, stored as
/// coprime integers with wy > 0 (or wx > 0 when wy = 0).
#[derive(Clone, Debug, PartialEq)]
pub struct EulerField {
    pub wx: Rat,
    pub wy: Rat,
    pub kind: WeightKind,
}

impl EulerField {
    pub fn new(wx: Rat, wy: Rat) -> Result<Self, SymmetryError> {
        if wx.is_zero() && wy.is_zero() {
            return Err(SymmetryError::InvalidField("zero weight vector".into()));
        }
        let (wx, wy) = normalize_projective(wx, wy);
        let kind = if wx.is_zero() || wy.is_zero() {
            WeightKind::Parabolic
        } else if wx.is_positive() == wy.is_positive() {
            WeightKind::Elliptic
        } else {
            WeightKind::Hyperbolic
        };
        Ok(EulerField { wx, wy, kind })
    }

    pub fn field(&self) -> PlaneVectorField {
        PlaneVectorField::euler(&self.wx, &self.wy)
    }
}

impl fmt::Display for EulerField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.wx, self.wy)
    }
}

/// Scales to coprime integers and fixes the sign convention wy > 0
/// (wx > 0 when wy = 0). Requires (wx, wy) ≠ (0, 0).
fn normalize_projective(wx: Rat, wy: Rat) -> (Rat, Rat) {
    let lcm = wx.denom().lcm(wy.denom());
    let a = wx.numer() * (&lcm / wx.denom());
    let b = wy.numer() * (&lcm / wy.denom());
    let g = a.gcd(&b);
    let (mut a, mut b) = if g.is_zero() { (a, b) } else { (a / &g, b / &g) };
    let flip = if b.is_zero() { a.is_negative() } else { b.is_negative() };
    if flip {
        a = -a;
        b = -b;
    }
    (Rat::from_integer(a), Rat::from_integer(b))
}

/// Polynomial in p with rational-function coefficients, ascending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct PPoly {
    coeffs: Vec<RatFn>,
}

impl PPoly {
    pub fn new(mut coeffs: Vec<RatFn>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        PPoly { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of p^k (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> RatFn {
        self.coeffs.get(k).cloned().unwrap_or_else(RatFn::zero)
    }
}

impl fmt::Display for PPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let descending: Vec<(&RatFn, u32)> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .map(|(k, c)| (c, k as u32))
            .collect();
        write!(f, "{}", render_p_polynomial(&descending))
    }
}

/// Prolongation of X to the jet variable: ζ = η_x + p(η_y − ξ_x) − p²ξ_y.
pub fn prolong(x: &PlaneVectorField) -> PPoly {
    let xi_x = x.xi.diff(Var::X);
    let xi_y = x.xi.diff(Var::Y);
    let eta_x = x.eta.diff(Var::X);
    let eta_y = x.eta.diff(Var::Y);
    PPoly::new(vec![eta_x, &eta_y - &xi_x, -xi_y])
}

/// The full Lie derivative X̃(F) = ξF_x + ηF_y + ζF_p as a polynomial in p
/// (degree ≤ 4), before reduction modulo F.
pub fn lie_derivative(ode: &CubicODE, x: &PlaneVectorField) -> PPoly {
    let f: Vec<&RatFn> = vec![&ode.k0, &ode.k1, &ode.k2, &ode.k3];
    let zeta = prolong(x);

    let mut out = vec![RatFn::zero(); 7];
    for (k, c) in f.iter().enumerate() {
        let fx = c.diff(Var::X);
        let fy = c.diff(Var::Y);
        out[k] = &out[k] + &(&(&x.xi * &fx) + &(&x.eta * &fy));
        // F_p contributes k·c at p^(k-1), multiplied by ζ.
        if k >= 1 {
            let kc = &RatFn::constant(rat(k as i64)) * *c;
            for z in 0..3 {
                let zc = zeta.coeff(z);
                if !zc.is_zero() {
                    out[k - 1 + z] = &out[k - 1 + z] + &(&kc * &zc);
                }
            }
        }
    }
    PPoly::new(out)
}

/// Remainder of X̃(F) after division by F as polynomials in p over the field
/// of rational functions, with denominators cleared. X is an infinitesimal
/// symmetry of the web exactly when the residual vanishes.
pub fn symmetry_residual(
    ode: &CubicODE,
    x: &PlaneVectorField,
) -> Result<PPoly, SymmetryError> {
    let f = [&ode.k0, &ode.k1, &ode.k2, &ode.k3];
    let deg = match f.iter().rposition(|c| !c.is_zero()) {
        Some(d) if d >= 1 => d,
        _ => return Err(SymmetryError::LeadingCoefficientZero),
    };

    let lie = lie_derivative(ode, x);
    let mut r: Vec<RatFn> = (0..=lie.degree().unwrap_or(0)).map(|k| lie.coeff(k)).collect();

    while r.len() > deg {
        let top = r.len() - 1;
        let q = &r[top] / f[deg];
        if !q.is_zero() {
            let shift = top - deg;
            for (s, fc) in f.iter().enumerate().take(deg + 1) {
                r[shift + s] = &r[shift + s] - &(&q * *fc);
            }
        }
        r.pop();
        while r.last().map_or(false, |c| c.is_zero()) {
            r.pop();
        }
        if r.len() <= deg {
            break;
        }
    }

    // Clear denominators: scaling by a nonzero function keeps ≡0 intact.
    let mut common_den = Poly2::one();
    for c in &r {
        if !c.is_polynomial() {
            common_den = &common_den * c.den();
        }
    }
    if !common_den.is_one() {
        let d = RatFn::from(common_den);
        r = r.iter().map(|c| c * &d).collect();
    }
    Ok(PPoly::new(r))
}

/// Outcome of weight inference: the projective solution set of the
/// homogeneity system over all monomials of the equation.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightInference {
    /// The system only has the trivial solution: not weighted homogeneous.
    NotHomogeneous,
    /// A unique projective weight vector.
    Unique(EulerField),
    /// A two-parameter family: every weight vector fits (e.g. monomial
    /// equations). Two independent representatives are listed.
    Family(Vec<EulerField>),
}

impl WeightInference {
    /// Representative weight vectors (empty when not homogeneous).
    pub fn fields(&self) -> Vec<&EulerField> {
        match self {
            WeightInference::NotHomogeneous => Vec::new(),
            WeightInference::Unique(e) => vec![e],
            WeightInference::Family(es) => es.iter().collect(),
        }
    }
}

/// Infers quasihomogeneous weights: each monomial x^i y^j p^k of the equation
/// must have the same weight λ under (x, y) → (t^wx x, t^wy y), p carrying
/// weight wy − wx. Monomial (or homogeneous) denominators contribute with
/// their weight subtracted.
pub fn infer_weights(ode: &CubicODE) -> WeightInference {
    let mut rows: Vec<[Rat; 3]> = Vec::new();
    for (k, coeff) in [&ode.k0, &ode.k1, &ode.k2, &ode.k3].into_iter().enumerate() {
        if coeff.is_zero() {
            continue;
        }
        let k = k as i64;
        // Reference exponent of the denominator; all other denominator terms
        // must share its weight (rows without a λ entry).
        let (a0, b0, _) = coeff.den().leading().expect("denominator is nonzero");
        for (a, b, _) in coeff.den().iter() {
            if (a, b) != (a0, b0) {
                rows.push([rat(a as i64 - a0 as i64), rat(b as i64 - b0 as i64), rat(0)]);
            }
        }
        for (i, j, _) in coeff.num().iter() {
            rows.push([
                rat(i as i64 - a0 as i64 - k),
                rat(j as i64 - b0 as i64 + k),
                rat(-1),
            ]);
        }
    }

    let basis = nullspace_3(&rows);
    match basis.len() {
        0 => WeightInference::NotHomogeneous,
        1 => {
            let [wx, wy, _] = basis.into_iter().next().expect("length checked");
            match EulerField::new(wx, wy) {
                Ok(e) => WeightInference::Unique(e),
                Err(_) => WeightInference::NotHomogeneous,
            }
        }
        _ => {
            let mut fields: Vec<EulerField> = Vec::new();
            for [wx, wy, _] in basis {
                if let Ok(e) = EulerField::new(wx, wy) {
                    if !fields.contains(&e) {
                        fields.push(e);
                    }
                }
            }
            WeightInference::Family(fields)
        }
    }
}

/// Nullspace basis of a homogeneous system with three unknowns.
fn nullspace_3(rows: &[[Rat; 3]]) -> Vec<[Rat; 3]> {
    let mut m: Vec<[Rat; 3]> = rows.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..3 {
        let Some(pivot_row) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot_row);
        let inv = m[rank][col].clone().recip();
        for c in 0..3 {
            m[rank][c] = &m[rank][c] * &inv;
        }
        for r in 0..m.len() {
            if r != rank && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..3 {
                    m[r][c] = &m[r][c] - &(&factor * &m[rank][c]);
                }
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == 3 {
            break;
        }
    }

    let mut basis = Vec::new();
    for free_col in 0..3 {
        if pivots.contains(&free_col) {
            continue;
        }
        let mut v = [rat(0), rat(0), rat(0)];
        v[free_col] = rat(1);
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][free_col].clone();
        }
        basis.push(v);
    }
    basis
}

/// Applies x = m·x̄^α, y = l·ȳ^β (p transforms as dy/dx accordingly) and
/// re-normalizes the leading p̄³ monomial factor away. Every exponent must
/// come out an integer; negative integers are absorbed into rational
/// coefficients.
pub fn monomial_substitute(
    ode: &CubicODE,
    alpha: &Rat,
    beta: &Rat,
    m: &Rat,
    l: &Rat,
) -> Result<CubicODE, SymmetryError> {
    if alpha.is_zero() || beta.is_zero() {
        return Err(SymmetryError::InvalidSubstitution(
            "exponents alpha, beta must be nonzero".into(),
        ));
    }
    if m.is_zero() || l.is_zero() {
        return Err(SymmetryError::InvalidSubstitution(
            "scale factors m, l must be nonzero".into(),
        ));
    }

    // dp bookkeeping: p = (lβ/(mα))·(ȳ^(β−1)/x̄^(α−1))·p̄. Clearing the p̄³
    // factor multiplies the equation by (mα/(lβ))³·x̄^(3(α−1))·ȳ^(−3(β−1)),
    // so the p̄^k coefficient carries x̄, ȳ shifts (3−k)(α−1), (k−3)(β−1)
    // and the constant (lβ/(mα))^(k−3).
    let jet = (l * beta) / (m * alpha);

    let mut offenders: Vec<String> = Vec::new();
    let mut transformed: Vec<Option<RatFn>> = Vec::new();
    for (k, coeff) in [&ode.k0, &ode.k1, &ode.k2, &ode.k3].into_iter().enumerate() {
        if coeff.is_zero() {
            transformed.push(Some(RatFn::zero()));
            continue;
        }
        let k_i = k as i64;
        let shift_x = (alpha - rat(1)) * rat(3 - k_i);
        let shift_y = (beta - rat(1)) * rat(k_i - 3);

        let num = transform_poly(
            coeff.num(),
            alpha,
            beta,
            m,
            l,
            &shift_x,
            &shift_y,
            k as u32,
            &mut offenders,
        );
        let den = transform_poly(
            coeff.den(),
            alpha,
            beta,
            m,
            l,
            &rat(0),
            &rat(0),
            k as u32,
            &mut offenders,
        );
        match (num, den) {
            (Some(n), Some(d)) => {
                let (n, d) = clear_laurent(n, d);
                transformed.push(Some(
                    &RatFn::constant(rat_pow(&jet, k_i - 3))
                        * &RatFn::new(n, d).expect("denominator stays nonzero"),
                ));
            }
            _ => transformed.push(None),
        }
    }

    if !offenders.is_empty() {
        return Err(SymmetryError::NonIntegerExponents { offenders });
    }
    let mut it = transformed.into_iter().map(|c| c.expect("no offenders"));
    let (k0, k1, k2, k3) = (
        it.next().expect("four"),
        it.next().expect("four"),
        it.next().expect("four"),
        it.next().expect("four"),
    );
    Ok(CubicODE::new(k3, k2, k1, k0)?)
}

/// Laurent polynomial with exact exponents: term map (ex, ey) -> coefficient.
type Laurent = Vec<(i64, i64, Rat)>;

/// Transforms each monomial c·x^i·y^j to c·m^i·l^j·x̄^(iα+sx)·ȳ^(jβ+sy),
/// recording non-integer exponents as offenders (rendered with p^k attached).
#[allow(clippy::too_many_arguments)]
fn transform_poly(
    poly: &Poly2,
    alpha: &Rat,
    beta: &Rat,
    m: &Rat,
    l: &Rat,
    shift_x: &Rat,
    shift_y: &Rat,
    p_power: u32,
    offenders: &mut Vec<String>,
) -> Option<Laurent> {
    let mut out: Laurent = Vec::new();
    let mut ok = true;
    for (i, j, c) in poly.iter() {
        let ex = alpha * rat(i as i64) + shift_x;
        let ey = beta * rat(j as i64) + shift_y;
        if !ex.is_integer() || !ey.is_integer() {
            offenders.push(render_monomial(i, j, p_power));
            ok = false;
            continue;
        }
        let factor = rat_pow(m, i as i64) * rat_pow(l, j as i64);
        out.push((
            integer_part(&ex),
            integer_part(&ey),
            c * &factor,
        ));
    }
    ok.then_some(out)
}

fn integer_part(r: &Rat) -> i64 {
    let i: BigInt = r.to_integer();
    i64::try_from(i).expect("substitution exponents stay small")
}

/// Shifts a num/den Laurent pair by the common monomial making both plain
/// polynomials (the shift cancels in the quotient).
fn clear_laurent(num: Laurent, den: Laurent) -> (Poly2, Poly2) {
    let min_x = num.iter().chain(&den).map(|t| t.0).min().unwrap_or(0).min(0);
    let min_y = num.iter().chain(&den).map(|t| t.1).min().unwrap_or(0).min(0);
    let build = |terms: Laurent| {
        Poly2::from_terms(terms.into_iter().map(|(ex, ey, c)| {
            ((ex - min_x) as u32, (ey - min_y) as u32, c)
        }))
    };
    (build(num), build(den))
}

fn render_monomial(i: u32, j: u32, k: u32) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (sym, e) in [("x", i), ("y", j), ("p", k)] {
        match e {
            0 => {}
            1 => parts.push(sym.to_string()),
            _ => parts.push(format!("{sym}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Pairing γ(X) of the Chern connection with a vector field. Constant when
/// the web is hexagonal and X is a symmetry.
pub fn gamma_pairing(ode: &ReducedODE, x: &PlaneVectorField) -> Result<RatFn, WebError> {
    let gamma: OneForm = ode.chern_connection()?;
    Ok(gamma.pair(&x.xi, &x.eta))
}
