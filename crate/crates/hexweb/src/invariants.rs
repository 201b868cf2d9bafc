//! Local invariants of a singular web germ at the origin: multiplicity of the
//! degenerate direction, the symmetrized quartic with its i/j covariants and
//! their cross-ratio limit, discriminant branch structure, and connection
//! periods around discriminant branches.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::upoly::{self, UPoly};
use crate::algebra::{rat, ratq, BinaryForm, COneForm, CRatFn, Poly2, Rat, RatFn, Var};
use crate::numeric;
use crate::symmetry::{infer_weights, symmetry_residual, EulerField, WeightInference, WeightKind};
use crate::tol;
use crate::webform::{CubicODE, ReducedODE, WebError};

/// Errors from invariant computations.
#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("every direction at the origin is degenerate: the direction form vanishes")]
    AllDirectionsDegenerate,
    #[error("an ODE coefficient has a pole at the origin")]
    PoleAtOrigin,
    #[error("not weighted homogeneous for the given Euler field")]
    NotHomogeneous,
    #[error("i^3 and j^2 both vanish identically, so their ratio is undefined")]
    BothZero,
    #[error("loop '{label}' passes too close to the discriminant (clearance {clearance:.3e} < {min:.3e})")]
    LoopTooCloseToDiscriminant { label: String, clearance: f64, min: f64 },
    #[error("quadrature on loop '{label}' did not reach tolerance {tol:.1e}")]
    QuadratureDidNotConverge { label: String, tol: f64 },
    #[error("the discriminant vanishes identically")]
    DegenerateDiscriminant,
    #[error("the discriminant is not polynomial, so branch analysis is unavailable")]
    NonPolynomialDiscriminant,
    #[error(transparent)]
    Web(#[from] WebError),
}

/// Point of the rational projective line, normalized to [1 : b/a] when the
/// first coordinate is nonzero and [0 : 1] otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectivePair {
    pub a: Rat,
    pub b: Rat,
}

impl ProjectivePair {
    pub fn new(a: Rat, b: Rat) -> Result<Self, InvariantError> {
        if a.is_zero() && b.is_zero() {
            return Err(InvariantError::BothZero);
        }
        if a.is_zero() {
            Ok(ProjectivePair { a, b: Rat::one() })
        } else {
            Ok(ProjectivePair { b: b / &a, a: Rat::one() })
        }
    }

    pub fn as_f64(&self) -> (f64, f64) {
        (crate::algebra::to_f64(&self.a), crate::algebra::to_f64(&self.b))
    }
}

impl fmt::Display for ProjectivePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.a, self.b)
    }
}

/// Branch structure of the discriminant germ at the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SingularityType {
    /// The discriminant does not pass through the origin.
    None,
    /// Every branch through the origin is smooth; multiplicities are listed
    /// in descending order.
    SmoothBranches { count: usize, multiplicities: Vec<u32> },
    /// At least one branch through the origin is itself singular.
    WithSingularBranch { smooth_count: usize, singular_count: usize },
}

impl fmt::Display for SingularityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SingularityType::None => write!(f, "regular point of the discriminant"),
            SingularityType::SmoothBranches { count, multiplicities } => {
                write!(f, "{count} smooth branch(es), multiplicities {multiplicities:?}")
            }
            SingularityType::WithSingularBranch { smooth_count, singular_count } => {
                write!(f, "{smooth_count} smooth and {singular_count} singular branch(es)")
            }
        }
    }
}

/// Maximal multiplicity (1, 2, or 3) among the projective roots of the
/// direction form K3(0)·dy³ + K2(0)·dy²dx + K1(0)·dydx² + K0(0)·dx³,
/// counting the root at infinity when the leading coefficients vanish.
pub fn root_multiplicity(ode: &CubicODE) -> Result<u8, InvariantError> {
    let zero = Rat::zero();
    let mut vals = Vec::with_capacity(4);
    // coeffs() is [k3, k2, k1, k0]; build the mu-polynomial ascending.
    for k in ode.coeffs().iter().rev() {
        vals.push(k.eval_rat(&zero, &zero).ok_or(InvariantError::PoleAtOrigin)?);
    }
    let c = UPoly::new(vals);
    let deg = match c.degree() {
        None => return Err(InvariantError::AllDirectionsDegenerate),
        Some(d) => d as u8,
    };
    let infinity = 3 - deg;
    let finite = if deg >= 1 { upoly::max_root_multiplicity(&c) as u8 } else { 0 };
    Ok(infinity.max(finite).max(1))
}

/// Product of the direction form with the weighted linear form
/// wx·x·dy − wy·y·dx, as a binary quartic with raw coefficients.
///
/// Denominators of the ODE coefficients are cleared first; this rescales the
/// quartic by a common factor, which cancels in the ratio [i³ : j²].
pub fn symmetrized_quartic(ode: &CubicODE, e: &EulerField) -> BinaryForm {
    let ks = ode.coeffs();
    let mut cleared = Vec::with_capacity(4);
    for (idx, k) in ks.iter().enumerate() {
        let mut p = k.num().clone();
        for (j, other) in ks.iter().enumerate() {
            if j != idx {
                p = &p * other.den();
            }
        }
        cleared.push(p);
    }
    let cubic = BinaryForm::new(cleared);
    let u = Poly2::monomial(1, 0, e.wx.clone());
    let v = Poly2::monomial(0, 1, -e.wy.clone());
    cubic.mul_linear(&u, &v)
}

/// Degree-2 and degree-3 covariants of a binary quartic, in the convention
/// where the quartic is a4·dy⁴ + 4a3·dy³dx + 6a2·dy²dx² + 4a1·dydx³ + a0·dx⁴.
pub fn quartic_ij(q: &BinaryForm) -> (Poly2, Poly2) {
    assert_eq!(q.degree(), 4, "expected a binary quartic");
    let a4 = q.coeff_dy_pow(4).clone();
    let a3 = q.coeff_dy_pow(3).scale(&ratq(1, 4));
    let a2 = q.coeff_dy_pow(2).scale(&ratq(1, 6));
    let a1 = q.coeff_dy_pow(1).scale(&ratq(1, 4));
    let a0 = q.coeff_dy_pow(0).clone();

    let i1 = &a0 * &a4;
    let i2 = (&a1 * &a3).scale(&rat(4));
    let i3 = (&a2 * &a2).scale(&rat(3));
    let i = &(&i1 - &i2) + &i3;

    let j1 = &(&a4 * &a2) * &a0;
    let j2 = (&(&a1 * &a2) * &a3).scale(&rat(2));
    let j3 = &(&a2 * &a2) * &a2;
    let j4 = &a4 * &(&a1 * &a1);
    let j5 = &a0 * &(&a3 * &a3);
    let j = &(&(&(&j1 + &j2) - &j3) - &j4) - &j5;
    (i, j)
}

/// Integer weights of a normalized Euler field.
fn int_weights(e: &EulerField) -> (i64, i64) {
    let wx = e.wx.to_integer().to_i64().expect("small integer weight");
    let wy = e.wy.to_integer().to_i64().expect("small integer weight");
    (wx, wy)
}

/// Primitive exponent step along the weight line, oriented so that larger
/// step index means higher order in the parameter s that tends to zero at
/// the distinguished end of the germ.
fn series_direction(e: &EulerField) -> (i64, i64) {
    let (wx, wy) = int_weights(e);
    match e.kind {
        WeightKind::Parabolic => {
            if wx == 0 {
                (1, 0)
            } else {
                (0, 1)
            }
        }
        WeightKind::Hyperbolic => (wy, -wx),
        WeightKind::Elliptic => (-wy, wx),
    }
}

/// Writes an E-homogeneous polynomial as anchor_monomial · P(s) where s is
/// the weight-zero parameter with exponent step d. Returns the anchor
/// exponents and P with P(0) ≠ 0.
fn weight_line_series(
    p: &Poly2,
    d: (i64, i64),
) -> Result<((i64, i64), UPoly), InvariantError> {
    let terms: Vec<(i64, i64, Rat)> =
        p.iter().map(|(i, j, c)| (i as i64, j as i64, c.clone())).collect();
    assert!(!terms.is_empty(), "series of the zero polynomial");
    let key = |a: i64, b: i64| if d.0 > 0 { a } else { b };
    let step = if d.0 > 0 { d.0 } else { d.1 };
    let base = terms.iter().map(|&(a, b, _)| key(a, b)).min().expect("nonempty");
    let anchor = terms
        .iter()
        .find(|&&(a, b, _)| key(a, b) == base)
        .map(|&(a, b, _)| (a, b))
        .expect("anchor term");
    let mut coeffs = Vec::new();
    for (a, b, c) in terms {
        let offset = key(a, b) - base;
        if offset % step != 0 {
            return Err(InvariantError::NotHomogeneous);
        }
        let t = (offset / step) as usize;
        if (a, b) != (anchor.0 + t as i64 * d.0, anchor.1 + t as i64 * d.1) {
            return Err(InvariantError::NotHomogeneous);
        }
        if coeffs.len() <= t {
            coeffs.resize(t + 1, Rat::zero());
        }
        coeffs[t] = c;
    }
    Ok((anchor, UPoly::new(coeffs)))
}

/// Limit of [i³ : j²] as the weight-zero parameter s tends to zero, computed
/// exactly from the lowest-order series coefficients. Order mismatch gives
/// [1:0] or [0:1]; identical vanishing is an error.
pub fn cross_ratio_invariant(
    ode: &CubicODE,
    e: &EulerField,
) -> Result<ProjectivePair, InvariantError> {
    let residual =
        symmetry_residual(ode, &e.field()).map_err(|_| InvariantError::NotHomogeneous)?;
    if !residual.is_zero() {
        return Err(InvariantError::NotHomogeneous);
    }
    let (i, j) = quartic_ij(&symmetrized_quartic(ode, e));
    let i3 = i.pow(3);
    let j2 = j.pow(2);
    compare_lowest_orders(&i3, &j2, series_direction(e))
}

/// Projective ratio of the lowest-order series coefficients of two
/// E-homogeneous polynomials sharing one weight line.
fn compare_lowest_orders(
    i3: &Poly2,
    j2: &Poly2,
    d: (i64, i64),
) -> Result<ProjectivePair, InvariantError> {
    if i3.is_zero() && j2.is_zero() {
        return Err(InvariantError::BothZero);
    }
    if i3.is_zero() {
        return ProjectivePair::new(Rat::zero(), Rat::one());
    }
    if j2.is_zero() {
        return ProjectivePair::new(Rat::one(), Rat::zero());
    }
    let (anchor_i, series_i) = weight_line_series(i3, d)?;
    let (anchor_j, series_j) = weight_line_series(j2, d)?;
    let key = |a: i64, b: i64| if d.0 > 0 { a } else { b };
    let (ki, kj) = (key(anchor_i.0, anchor_i.1), key(anchor_j.0, anchor_j.1));
    if ki < kj {
        ProjectivePair::new(Rat::one(), Rat::zero())
    } else if ki > kj {
        ProjectivePair::new(Rat::zero(), Rat::one())
    } else if anchor_i != anchor_j {
        Err(InvariantError::NotHomogeneous)
    } else {
        ProjectivePair::new(series_i.coeff(0), series_j.coeff(0))
    }
}

/// Branch structure of a weighted homogeneous discriminant germ at the
/// origin: axis branches from the monomial part, non-axis branches from the
/// distinct roots of the weight-zero profile polynomial. Non-axis branches
/// through the origin exist only for elliptic weights; they are smooth
/// exactly when min(wx, wy) = 1. Axis branches are always smooth.
pub fn discriminant_singularity_type(
    delta: &Poly2,
    e: &EulerField,
) -> Result<SingularityType, InvariantError> {
    if delta.is_zero() {
        return Err(InvariantError::DegenerateDiscriminant);
    }
    let a = delta.min_deg_x().expect("nonzero");
    let b = delta.min_deg_y().expect("nonzero");
    let h = delta.divide_by_monomial(a, b);
    let (_, profile) = weight_line_series(&h, series_direction(e))?;

    let mut smooth: Vec<u32> = Vec::new();
    let mut singular_count = 0usize;
    if a > 0 {
        smooth.push(a);
    }
    if b > 0 {
        smooth.push(b);
    }
    if e.kind == WeightKind::Elliptic && profile.degree().unwrap_or(0) >= 1 {
        let (wx, wy) = int_weights(e);
        let branch_is_smooth = wx.min(wy) == 1;
        for (factor, mult) in upoly::square_free_decomposition(&profile) {
            let distinct = factor.degree().unwrap_or(0);
            if branch_is_smooth {
                smooth.extend(std::iter::repeat(mult).take(distinct));
            } else {
                singular_count += distinct;
            }
        }
    }

    if smooth.is_empty() && singular_count == 0 {
        return Ok(SingularityType::None);
    }
    if singular_count > 0 {
        return Ok(SingularityType::WithSingularBranch {
            smooth_count: smooth.len(),
            singular_count,
        });
    }
    smooth.sort_unstable_by(|x, y| y.cmp(x));
    Ok(SingularityType::SmoothBranches { count: smooth.len(), multiplicities: smooth })
}

/// Closed path t ∈ [0,1] ↦ (x(t), y(t)) in complex coordinates, carrying its
/// velocity for contour integration.
#[derive(Clone)]
pub struct ParamLoop {
    pub label: String,
    path: Arc<dyn Fn(f64) -> ((Complex64, Complex64), (Complex64, Complex64)) + Send + Sync>,
}

impl ParamLoop {
    pub fn new(
        label: impl Into<String>,
        path: impl Fn(f64) -> ((Complex64, Complex64), (Complex64, Complex64))
            + Send
            + Sync
            + 'static,
    ) -> Self {
        ParamLoop { label: label.into(), path: Arc::new(path) }
    }

    /// Position and velocity at parameter t.
    pub fn at(&self, t: f64) -> ((Complex64, Complex64), (Complex64, Complex64)) {
        (self.path)(t)
    }

    /// Counterclockwise circle in the x-plane at fixed y.
    pub fn circle_x(label: impl Into<String>, center: Complex64, radius: f64, y: Complex64) -> Self {
        ParamLoop::new(label, move |t| {
            let phase = Complex64::new(0.0, std::f64::consts::TAU * t).exp();
            let x = center + radius * phase;
            let vx = Complex64::new(0.0, std::f64::consts::TAU) * radius * phase;
            ((x, y), (vx, Complex64::new(0.0, 0.0)))
        })
    }

    /// Counterclockwise circle in the y-plane at fixed x.
    pub fn circle_y(label: impl Into<String>, center: Complex64, radius: f64, x: Complex64) -> Self {
        ParamLoop::new(label, move |t| {
            let phase = Complex64::new(0.0, std::f64::consts::TAU * t).exp();
            let y = center + radius * phase;
            let vy = Complex64::new(0.0, std::f64::consts::TAU) * radius * phase;
            ((x, y), (Complex64::new(0.0, 0.0), vy))
        })
    }
}

impl fmt::Debug for ParamLoop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamLoop").field("label", &self.label).finish()
    }
}

/// A period value attributed to a named discriminant branch loop.
#[derive(Clone, Debug)]
pub struct LabeledPeriod {
    pub label: String,
    pub value: Complex64,
}

/// First-order distance estimate from a point to the discriminant zero set.
fn discriminant_clearance(
    delta: &CRatFn,
    dx: &CRatFn,
    dy: &CRatFn,
    x: Complex64,
    y: Complex64,
) -> f64 {
    let v = delta.eval(x, y);
    if !v.re.is_finite() || !v.im.is_finite() {
        return 0.0;
    }
    let gx = dx.eval(x, y);
    let gy = dy.eval(x, y);
    let grad = (gx.norm_sqr() + gy.norm_sqr()).sqrt();
    if !grad.is_finite() {
        return 0.0;
    }
    if grad == 0.0 {
        return if v.norm() == 0.0 { 0.0 } else { f64::INFINITY };
    }
    v.norm() / grad
}

/// Normalized periods (1/2πi)∮γ of the connection form along each loop,
/// in input order. Loops must keep a first-order clearance of at least
/// tol::DISC_CLEARANCE from the discriminant.
pub fn gamma_periods(
    ode: &ReducedODE,
    loops: &[ParamLoop],
) -> Result<Vec<Complex64>, InvariantError> {
    let gamma = COneForm::compile(&ode.chern_connection()?);
    let delta = ode.discriminant();
    let cdelta = CRatFn::compile(&delta);
    let cdx = CRatFn::compile(&delta.diff(Var::X));
    let cdy = CRatFn::compile(&delta.diff(Var::Y));
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);

    let mut out = Vec::with_capacity(loops.len());
    for lp in loops {
        let mut min_clearance = f64::INFINITY;
        for k in 0..256 {
            let ((x, y), _) = lp.at(k as f64 / 256.0);
            min_clearance = min_clearance.min(discriminant_clearance(&cdelta, &cdx, &cdy, x, y));
        }
        if min_clearance < tol::DISC_CLEARANCE {
            return Err(InvariantError::LoopTooCloseToDiscriminant {
                label: lp.label.clone(),
                clearance: min_clearance,
                min: tol::DISC_CLEARANCE,
            });
        }
        let mut integrand = |t: f64| {
            let ((x, y), (vx, vy)) = lp.at(t);
            let val = gamma.pair(x, y, vx, vy) / two_pi_i;
            (val.re.is_finite() && val.im.is_finite()).then_some(val)
        };
        match numeric::periodic_integral(&mut integrand, tol::PERIOD_QUADRATURE, 1 << 17) {
            Some((value, _)) => out.push(value),
            None => {
                return Err(InvariantError::QuadratureDidNotConverge {
                    label: lp.label.clone(),
                    tol: tol::PERIOD_QUADRATURE,
                })
            }
        }
    }
    Ok(out)
}

/// Discriminant of the ODE as a polynomial, available when the coefficient
/// denominators cancel.
pub fn discriminant_polynomial(ode: &CubicODE) -> Option<Poly2> {
    let delta = ode.discriminant();
    delta.is_polynomial().then(|| delta.num().clone())
}

fn format_c64(z: Complex64) -> String {
    if z.im.abs() <= 1e-12 * z.re.abs().max(1.0) {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

/// Substitutes a complex value for y, producing ascending x-coefficients.
fn univariate_in_x(p: &Poly2, y: Complex64) -> Vec<Complex64> {
    let deg = p.deg_x().unwrap_or(0) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (i, j, c) in p.iter() {
        out[i as usize] += crate::algebra::to_c64(c) * y.powu(j);
    }
    out
}

/// Substitutes a complex value for x, producing ascending y-coefficients.
fn univariate_in_y(p: &Poly2, x: Complex64) -> Vec<Complex64> {
    let deg = p.deg_y().unwrap_or(0) as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); deg + 1];
    for (i, j, c) in p.iter() {
        out[j as usize] += crate::algebra::to_c64(c) * x.powu(i);
    }
    out
}

fn trimmed_roots(coeffs: Vec<Complex64>) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut cs = coeffs;
    while cs.last().map_or(false, |c| c.norm() <= 1e-12 * scale) {
        cs.pop();
    }
    if cs.len() <= 1 {
        return Vec::new();
    }
    numeric::poly_roots(&cs)
}

/// Radius for a transversal circle around `center`: a quarter of the gap to
/// the nearest other zero (cluster members within 1e-6 excluded), capped.
fn transversal_radius(center: Complex64, zeros: &[Complex64]) -> f64 {
    let gap = zeros
        .iter()
        .map(|z| (z - center).norm())
        .filter(|d| *d > 1e-6)
        .fold(f64::INFINITY, f64::min);
    if gap.is_finite() {
        (gap / 4.0).min(0.4)
    } else {
        0.3
    }
}

/// One transversal loop per discriminant branch through the origin, in the
/// canonical order: the branch x = 0, then y = 0, then non-axis branches
/// sorted by their profile root (re, im). Base points sit at x = 4/5 and
/// y = 9/10 away from the respective axes.
pub fn standard_branch_loops(
    ode: &CubicODE,
    e: &EulerField,
) -> Result<Vec<ParamLoop>, InvariantError> {
    let delta =
        discriminant_polynomial(ode).ok_or(InvariantError::NonPolynomialDiscriminant)?;
    if delta.is_zero() {
        return Err(InvariantError::DegenerateDiscriminant);
    }
    let a = delta.min_deg_x().expect("nonzero");
    let b = delta.min_deg_y().expect("nonzero");
    let x0 = Complex64::new(0.8, 0.0);
    let y0 = Complex64::new(0.9, 0.0);
    let mut loops = Vec::new();

    if a > 0 {
        let zeros = trimmed_roots(univariate_in_x(&delta, y0));
        let center = Complex64::new(0.0, 0.0);
        let radius = transversal_radius(center, &zeros);
        loops.push(ParamLoop::circle_x("x=0", center, radius, y0));
    }
    if b > 0 {
        let zeros = trimmed_roots(univariate_in_y(&delta, x0));
        let center = Complex64::new(0.0, 0.0);
        let radius = transversal_radius(center, &zeros);
        loops.push(ParamLoop::circle_y("y=0", center, radius, x0));
    }

    if e.kind == WeightKind::Elliptic {
        let h = delta.divide_by_monomial(a, b);
        let (_, profile) = weight_line_series(&h, series_direction(e))?;
        if profile.degree().unwrap_or(0) >= 1 {
            let (wx, wy) = int_weights(e);
            let mut roots: Vec<Complex64> = Vec::new();
            for (factor, _) in upoly::square_free_decomposition(&profile) {
                let cs: Vec<Complex64> =
                    factor.coeffs().iter().map(crate::algebra::to_c64).collect();
                roots.extend(numeric::poly_roots(&cs));
            }
            roots.sort_by(numeric::lex_cmp);
            let zeros = trimmed_roots(univariate_in_y(&delta, x0));
            for s0 in roots {
                // Branch y^wx = s0 · x^wy; snap the predicted point to the
                // nearest actual discriminant zero in the y-slice.
                let predicted = (s0 * x0.powu(wy as u32)).powf(1.0 / wx as f64);
                let center = zeros
                    .iter()
                    .copied()
                    .min_by(|p, q| {
                        (p - predicted).norm().total_cmp(&(q - predicted).norm())
                    })
                    .unwrap_or(predicted);
                let radius = transversal_radius(center, &zeros);
                let label = format!("y^{wx}=({})*x^{wy}", format_c64(s0));
                loops.push(ParamLoop::circle_y(label, center, radius, x0));
            }
        }
    }
    Ok(loops)
}

/// The five local invariants of a web germ, with fields left undefined when
/// their preconditions fail. A regular germ (origin off the discriminant)
/// is flagged and carries no branch data.
#[derive(Clone, Debug)]
pub struct InvariantSignature {
    pub regular: bool,
    pub mu: Option<u8>,
    pub weights: Option<ProjectivePair>,
    pub euler_kind: Option<WeightKind>,
    pub sing_type: Option<SingularityType>,
    pub periods: Option<Vec<LabeledPeriod>>,
    pub cross_ratio: Option<ProjectivePair>,
}

/// Assembles the invariant signature of the germ at the origin. When no
/// Euler field is supplied, a unique inferred one is used; webs without a
/// unique weighting leave the weight-dependent fields undefined.
pub fn signature(ode: &CubicODE, field: Option<&EulerField>) -> InvariantSignature {
    let owned;
    let e: Option<&EulerField> = match field {
        Some(e) => Some(e),
        None => match infer_weights(ode) {
            WeightInference::Unique(u) => {
                owned = u;
                Some(&owned)
            }
            _ => None,
        },
    };

    let mu = root_multiplicity(ode).ok();
    let zero = Rat::zero();
    let delta_at_origin = ode.discriminant().eval_rat(&zero, &zero);
    let regular = matches!(&delta_at_origin, Some(v) if !v.is_zero());

    let weights = e.and_then(|e| ProjectivePair::new(e.wx.clone(), e.wy.clone()).ok());
    let euler_kind = e.map(|e| e.kind);
    let cross_ratio = e.and_then(|e| cross_ratio_invariant(ode, e).ok());

    let sing_type = if regular {
        Some(SingularityType::None)
    } else {
        e.and_then(|e| {
            let delta = discriminant_polynomial(ode)?;
            discriminant_singularity_type(&delta, e).ok()
        })
    };

    let periods = if regular {
        Some(Vec::new())
    } else {
        e.and_then(|e| {
            let loops = standard_branch_loops(ode, e).ok()?;
            // Non-monic presentations have no symbolic reduced form; their
            // connection is integrated through the numeric coframe route.
            let values = match ode.as_reduced() {
                Ok(reduced) => gamma_periods(&reduced, &loops).ok()?,
                Err(_) => crate::tracer::connection_periods(ode, &loops).ok()?,
            };
            Some(
                loops
                    .iter()
                    .zip(values)
                    .map(|(lp, value)| LabeledPeriod { label: lp.label.clone(), value })
                    .collect(),
            )
        })
    };

    InvariantSignature { regular, mu, weights, euler_kind, sing_type, periods, cross_ratio }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ratq;
    use crate::parser::{parse_ode, parse_xy_expr};
    use crate::symmetry::EulerField;

    fn euler(wx: i64, wy: i64) -> EulerField {
        EulerField::new(rat(wx), rat(wy)).unwrap()
    }

    fn poly(src: &str) -> Poly2 {
        let f = parse_xy_expr(src).unwrap();
        assert!(f.is_polynomial());
        f.num().clone()
    }

    #[test]
    fn root_multiplicities_of_the_three_kinds() {
        let triple = parse_ode("p^3 + x*p - y").unwrap();
        assert_eq!(root_multiplicity(&triple).unwrap(), 3);

        // Direction form dy·dx² at the origin: finite root 0 plus a double
        // root at infinity.
        let double = parse_ode("p*(x^2*y^2*p^2 + 1)").unwrap();
        assert_eq!(root_multiplicity(&double).unwrap(), 2);

        let simple = parse_ode("p^3 + p").unwrap();
        assert_eq!(root_multiplicity(&simple).unwrap(), 1);

        let pole = parse_ode("p^3 + (1)/(x)*p + 1").unwrap();
        assert!(matches!(root_multiplicity(&pole), Err(InvariantError::PoleAtOrigin)));
    }

    #[test]
    fn root_multiplicity_survives_invertible_direction_changes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let webs =
            ["p^3 + x*p - y", "p*(x^2*y^2*p^2 + 1)", "p^3 + p", "p^3 + 2*x*p + y"];
        for src in webs {
            let ode = parse_ode(src).unwrap();
            let expected = root_multiplicity(&ode).unwrap();
            let zero = Rat::zero();
            let v: Vec<Rat> = ode
                .coeffs()
                .iter()
                .map(|k| k.eval_rat(&zero, &zero).unwrap())
                .collect();
            for _ in 0..25 {
                // Invertible change (dy, dx) -> (a·dy + b·dx, c·dy + d·dx).
                let a = rng.gen_range(-3i64..=3);
                let b = rng.gen_range(-3i64..=3);
                let c = rng.gen_range(-3i64..=3);
                let d = rng.gen_range(-3i64..=3);
                if a * d - b * c == 0 {
                    continue;
                }
                // Transformed coefficients of Σ v_k (a·m + b)^k (c·m + d)^(3-k).
                let mut w = vec![Rat::zero(); 4];
                for (k, vk) in v.iter().enumerate() {
                    let first = UPoly::new(vec![rat(b), rat(a)]);
                    let second = UPoly::new(vec![rat(d), rat(c)]);
                    let mut term = UPoly::new(vec![vk.clone()]);
                    for _ in 0..k {
                        term = term.mul(&first);
                    }
                    for _ in 0..(3 - k) {
                        term = term.mul(&second);
                    }
                    for (idx, c) in term.coeffs().iter().enumerate() {
                        w[idx] = &w[idx] + c;
                    }
                }
                if w.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let changed = CubicODE::new(
                    RatFn::constant(w[3].clone()),
                    RatFn::constant(w[2].clone()),
                    RatFn::constant(w[1].clone()),
                    RatFn::constant(w[0].clone()),
                )
                .unwrap();
                assert_eq!(root_multiplicity(&changed).unwrap(), expected, "web {src}");
            }
        }
    }

    #[test]
    fn symmetrized_quartic_raw_coefficients() {
        let ode = parse_ode("p^3 + 2*x*p + y").unwrap();
        let q = symmetrized_quartic(&ode, &euler(2, 3));
        assert_eq!(q.degree(), 4);
        assert_eq!(*q.coeff_dy_pow(4), poly("2*x"));
        assert_eq!(*q.coeff_dy_pow(3), poly("-3*y"));
        assert_eq!(*q.coeff_dy_pow(2), poly("4*x^2"));
        assert_eq!(*q.coeff_dy_pow(1), poly("-4*x*y"));
        assert_eq!(*q.coeff_dy_pow(0), poly("-3*y^2"));
    }

    #[test]
    fn symmetrized_quartic_vanishes_on_the_euler_direction() {
        for (src, wx, wy) in [
            ("p^3 + 2*x*p + y", 2, 3),
            ("p^3 + x*p - y", 2, 3),
            ("p*(x^2*y^2*p^2 + 1)", 1, 0),
        ] {
            let ode = parse_ode(src).unwrap();
            let e = euler(wx, wy);
            let q = symmetrized_quartic(&ode, &e);
            // The Euler direction (dx, dy) = (wx·x, wy·y) annihilates the
            // linear factor, hence the whole quartic.
            let u = Poly2::monomial(0, 1, e.wy.clone());
            let v = Poly2::monomial(1, 0, e.wx.clone());
            let mut total = Poly2::zero();
            for m in 0..=4u32 {
                let raw = q.coeff_dy_pow((4 - m) as usize);
                let term = &(raw * &u.pow(4 - m)) * &v.pow(m);
                total = &total + &term;
            }
            assert!(total.is_zero(), "web {src}");
        }
    }

    #[test]
    fn quartic_covariants_match_frozen_values() {
        let cusp = parse_ode("p^3 + x*p - y").unwrap();
        let (i, j) = quartic_ij(&symmetrized_quartic(&cusp, &euler(2, 3)));
        assert_eq!(i, poly("(1/3)*x^4 + (9/4)*x*y^2"));
        assert_eq!(j, poly("(-1/27)*x^6 - (1/2)*x^3*y^2 - (27/16)*y^4"));

        let flat = parse_ode("p^3 + 2*x*p + y").unwrap();
        let (i, j) = quartic_ij(&symmetrized_quartic(&flat, &euler(2, 3)));
        assert_eq!(i, poly("(4/3)*x^4 - 9*x*y^2"));
        assert_eq!(j, poly("(-8/27)*x^6 - 5*x^3*y^2 + (27/16)*y^4"));

        let pure = BinaryForm::new(vec![
            Poly2::one(),
            Poly2::zero(),
            Poly2::zero(),
            Poly2::zero(),
            Poly2::zero(),
        ]);
        let (i, j) = quartic_ij(&pure);
        assert!(i.is_zero() && j.is_zero());
    }

    #[test]
    fn covariants_are_weighted_homogeneous() {
        for (src, wx, wy) in
            [("p^3 + x*p - y", 2i64, 3i64), ("p^3 + 2*x*p + y", 2, 3), ("p^3 + y^2*p - 5*y^3", 0, 1)]
        {
            let ode = parse_ode(src).unwrap();
            let (i, j) = quartic_ij(&symmetrized_quartic(&ode, &euler(wx, wy)));
            let weight_of = |p: &Poly2| -> Option<i64> {
                let mut w = None;
                for (a, b, _) in p.iter() {
                    let this = a as i64 * wx + b as i64 * wy;
                    match w {
                        None => w = Some(this),
                        Some(prev) => assert_eq!(prev, this, "web {src}"),
                    }
                }
                w
            };
            let wi = weight_of(&i);
            let wj = weight_of(&j);
            if let (Some(wi), Some(wj)) = (wi, wj) {
                // i and j scale as the 2nd and 3rd power of the coefficient
                // weight, so 3·weight(i) = 2·weight(j).
                assert_eq!(3 * wi, 2 * wj, "web {src}");
            }
        }
    }

    #[test]
    fn cross_ratio_frozen_values() {
        let cusp = parse_ode("p^3 + x*p - y").unwrap();
        let cr = cross_ratio_invariant(&cusp, &euler(2, 3)).unwrap();
        assert_eq!(cr, ProjectivePair::new(rat(1), ratq(1, 27)).unwrap());

        let flat = parse_ode("p^3 + 2*x*p + y").unwrap();
        let cr = cross_ratio_invariant(&flat, &euler(2, 3)).unwrap();
        assert_eq!(cr, ProjectivePair::new(rat(1), ratq(1, 27)).unwrap());

        // Parabolic web with explicit parameter t = 2 in the dx³ slot:
        // the limit is [1 : -t²/4].
        let par = parse_ode("p^3 + x^2*y^2*p + 2*x^3*y^3").unwrap();
        let cr = cross_ratio_invariant(&par, &euler(0, 1)).unwrap();
        assert_eq!(cr, ProjectivePair::new(rat(1), rat(-1)).unwrap());

        let not_hom = cross_ratio_invariant(&cusp, &euler(1, 1));
        assert!(matches!(not_hom, Err(InvariantError::NotHomogeneous)));

        // K = p³ alone: the quartic is x·dy⁴, whose covariants both vanish.
        let cubic_only = parse_ode("p^3").unwrap();
        let both = cross_ratio_invariant(&cubic_only, &euler(1, 0));
        assert!(matches!(both, Err(InvariantError::BothZero)));
    }

    #[test]
    fn lowest_order_comparison_handles_order_mismatch() {
        let d = (-3i64, 2i64);
        // Same weight line (weight 12 for [2:3]), different s-order.
        let lower = poly("x^6");
        let higher = poly("x^3*y^2");
        let cr = compare_lowest_orders(&lower, &higher, d).unwrap();
        assert_eq!(cr, ProjectivePair::new(rat(1), rat(0)).unwrap());
        let cr = compare_lowest_orders(&higher, &lower, d).unwrap();
        assert_eq!(cr, ProjectivePair::new(rat(0), rat(1)).unwrap());
        let cr = compare_lowest_orders(&poly("2*x^6"), &poly("3*x^6 + x^3*y^2"), d).unwrap();
        assert_eq!(cr, ProjectivePair::new(rat(1), ratq(3, 2)).unwrap());
    }

    #[test]
    fn singularity_types_of_known_discriminants() {
        let cusp = discriminant_singularity_type(&poly("4*x^3 + 27*y^2"), &euler(2, 3)).unwrap();
        assert_eq!(
            cusp,
            SingularityType::WithSingularBranch { smooth_count: 0, singular_count: 1 }
        );

        let axes = discriminant_singularity_type(&poly("x^3*y"), &euler(0, 1)).unwrap();
        assert_eq!(
            axes,
            SingularityType::SmoothBranches { count: 2, multiplicities: vec![3, 1] }
        );

        // Two transversal smooth branches: (x² − 3y)(2x² + 3y) for weights [1:2].
        let pair =
            discriminant_singularity_type(&poly("2*x^4 - 3*x^2*y - 9*y^2"), &euler(1, 2)).unwrap();
        assert_eq!(
            pair,
            SingularityType::SmoothBranches { count: 2, multiplicities: vec![1, 1] }
        );

        let constant = discriminant_singularity_type(&poly("4"), &euler(2, 3)).unwrap();
        assert_eq!(constant, SingularityType::None);

        assert!(matches!(
            discriminant_singularity_type(&poly("x + y^2"), &euler(2, 3)),
            Err(InvariantError::NotHomogeneous)
        ));
        assert!(matches!(
            discriminant_singularity_type(&Poly2::zero(), &euler(2, 3)),
            Err(InvariantError::DegenerateDiscriminant)
        ));
    }

    #[test]
    fn periods_of_closed_form_connections() {
        // γ = ½ d ln Δ: the period around a smooth discriminant point is ½.
        let cusp = parse_ode("p^3 + x*p - y").unwrap().as_reduced().unwrap();
        let lp = ParamLoop::circle_x(
            "transversal",
            Complex64::new(-3.0, 0.0),
            0.1,
            Complex64::new(2.0, 0.0),
        );
        let p = gamma_periods(&cusp, &[lp]).unwrap();
        assert!((p[0] - 0.5).norm() < 1e-8, "got {}", p[0]);

        // Flat web: the connection vanishes identically.
        let flat = parse_ode("p^3 + 2*x*p + y").unwrap().as_reduced().unwrap();
        let lp = ParamLoop::circle_x(
            "transversal",
            Complex64::new(-3.0, 0.0),
            0.1,
            Complex64::new(2.0, 0.0),
        );
        let p = gamma_periods(&flat, &[lp]).unwrap();
        assert!(p[0].norm() < 1e-10);

        // γ = (2/(3x))dx: residue 2/3 around x = 0.
        let shift = parse_ode("p^3 + x^2").unwrap().as_reduced().unwrap();
        let lp = ParamLoop::circle_x(
            "x=0",
            Complex64::new(0.0, 0.0),
            0.5,
            Complex64::new(1.0, 0.0),
        );
        let p = gamma_periods(&shift, &[lp]).unwrap();
        assert!((p[0] - Complex64::new(2.0 / 3.0, 0.0)).norm() < 1e-8, "got {}", p[0]);
    }

    #[test]
    fn period_rejects_loops_near_the_discriminant() {
        let cusp = parse_ode("p^3 + x*p - y").unwrap().as_reduced().unwrap();
        let lp = ParamLoop::circle_x(
            "grazing",
            Complex64::new(-3.0 + 1e-4, 0.0),
            1e-5,
            Complex64::new(2.0, 0.0),
        );
        assert!(matches!(
            gamma_periods(&cusp, &[lp]),
            Err(InvariantError::LoopTooCloseToDiscriminant { .. })
        ));
    }

    #[test]
    fn periods_are_homotopy_stable() {
        let cusp = parse_ode("p^3 + x*p - y").unwrap().as_reduced().unwrap();
        let y = Complex64::new(2.0, 0.0);
        let small = ParamLoop::circle_x("small", Complex64::new(-3.0, 0.0), 0.1, y);
        let shifted = ParamLoop::circle_x("shifted", Complex64::new(-3.05, 0.0), 0.2, y);
        let p = gamma_periods(&cusp, &[small, shifted]).unwrap();
        assert!((p[0] - p[1]).norm() < 1e-7, "{} vs {}", p[0], p[1]);
    }

    #[test]
    fn signature_of_the_flat_elliptic_web() {
        let ode = parse_ode("p^3 + 2*x*p + y").unwrap();
        let sig = signature(&ode, None);
        assert!(!sig.regular);
        assert_eq!(sig.mu, Some(3));
        assert_eq!(sig.weights, Some(ProjectivePair::new(rat(2), rat(3)).unwrap()));
        assert_eq!(sig.euler_kind, Some(WeightKind::Elliptic));
        assert_eq!(
            sig.sing_type,
            Some(SingularityType::WithSingularBranch { smooth_count: 0, singular_count: 1 })
        );
        let periods = sig.periods.as_ref().unwrap();
        assert_eq!(periods.len(), 1);
        assert!(periods[0].value.norm() < 1e-8);
        assert_eq!(sig.cross_ratio, Some(ProjectivePair::new(rat(1), ratq(1, 27)).unwrap()));
    }

    #[test]
    fn signature_of_the_cusp_web_carries_the_half_period() {
        let ode = parse_ode("p^3 + x*p - y").unwrap();
        let sig = signature(&ode, None);
        let periods = sig.periods.as_ref().unwrap();
        assert_eq!(periods.len(), 1);
        assert!((periods[0].value - 0.5).norm() < 1e-7, "got {}", periods[0].value);
    }

    #[test]
    fn signature_of_the_parabolic_product_web() {
        let ode = parse_ode("p*(x^2*y^2*p^2 + 1)").unwrap();
        let sig = signature(&ode, None);
        assert!(!sig.regular);
        assert_eq!(sig.mu, Some(2));
        assert_eq!(sig.euler_kind, Some(WeightKind::Parabolic));
        assert_eq!(
            sig.sing_type,
            Some(SingularityType::SmoothBranches { count: 2, multiplicities: vec![2, 2] })
        );
        // Periods go through the numeric route (no monic reduction exists):
        // the connection is dx/x, so [γ] has residue 1 on x = 0, 0 on y = 0.
        let periods = sig.periods.as_deref().expect("periods computed");
        assert_eq!(periods.len(), 2);
        assert_eq!(periods[0].label, "x=0");
        assert!((periods[0].value - 1.0).norm() < 1e-6, "x=0: {}", periods[0].value);
        assert_eq!(periods[1].label, "y=0");
        assert!(periods[1].value.norm() < 1e-6, "y=0: {}", periods[1].value);
    }

    #[test]
    fn signature_of_a_regular_web() {
        let ode = parse_ode("p^3 + p").unwrap();
        let sig = signature(&ode, None);
        assert!(sig.regular);
        assert_eq!(sig.mu, Some(1));
        assert_eq!(sig.sing_type, Some(SingularityType::None));
        assert_eq!(sig.periods.as_deref().map(|p| p.len()), Some(0));
    }
}
