//! Numeric web machinery: deterministic root extraction with multiplicities,
//! root continuation along paths, monodromy permutations, leaf tracing,
//! hexagon-closure circuits, a pointwise connection evaluator that also
//! covers non-monic presentations, curvature estimation, and SVG rendering
//! of real slices.

use std::fmt;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{CRatFn, Var};
use crate::invariants::ParamLoop;
use crate::numeric::{self, OdeStop};
use crate::tol;
use crate::webform::{coframe_at, CubicODE, Covector, WebError};

/// Errors from numeric tracing.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("invalid tracing input: {what}")]
    BadInput { what: String },
    #[error("the equation degenerates at ({x}, {y}): no direction data remains")]
    DegenerateAtPoint { x: Complex64, y: Complex64 },
    #[error("path '{label}' passes too close to the discriminant (clearance {clearance:.3e} < {min:.3e})")]
    PathHitsDiscriminant { label: String, clearance: f64, min: f64 },
    #[error("root matching became ambiguous at path parameter {t:.4}")]
    MatchingAmbiguous { t: f64 },
    #[error("the value {p} is not a root of the equation at the path start")]
    NotARoot { p: Complex64 },
    #[error("the seed ({x}, {y}) sits within clearance of the discriminant")]
    SeedOnDiscriminant { x: Complex64, y: Complex64 },
    #[error("left the regular domain: {what}")]
    LeftRegularDomain { what: String },
    #[error("quadrature on loop '{label}' did not reach tolerance {tol:.1e}")]
    QuadratureDidNotConverge { label: String, tol: f64 },
    #[error(transparent)]
    Web(#[from] WebError),
}

/// Numeric budget for tracing operations.
#[derive(Clone, Copy, Debug)]
pub struct TraceConfig {
    /// Local truncation error per integration step.
    pub step_tol: f64,
    /// Hard cap on a single step (arclength for leaves, chunk size for hops).
    pub max_step: f64,
    /// Minimum first-order distance kept from the discriminant.
    pub disc_clearance: f64,
    /// Two roots closer than this are not matched, they are reported.
    pub match_tol: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            step_tol: tol::TRACE_STEP,
            max_step: 0.05,
            disc_clearance: tol::DISC_CLEARANCE,
            match_tol: tol::ROOT_MATCH,
        }
    }
}

impl TraceConfig {
    fn validate(&self) -> Result<(), TraceError> {
        let fields = [
            ("step_tol", self.step_tol),
            ("max_step", self.max_step),
            ("disc_clearance", self.disc_clearance),
            ("match_tol", self.match_tol),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(TraceError::BadInput { what: format!("{name} must be positive") });
            }
        }
        Ok(())
    }
}

fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// First-order data of the cubic (or its slope-inverted companion) at a
/// point-slope pair, with the scales used for relative near-zero tests.
#[derive(Clone, Copy, Debug)]
struct Jet {
    f: Complex64,
    fx: Complex64,
    fy: Complex64,
    fp: Complex64,
    f_scale: f64,
    fp_scale: f64,
}

impl Jet {
    /// The slope-derivative is numerically zero: the pair sits on the
    /// critical locus where branches collide.
    fn critical(&self) -> bool {
        self.fp.norm() <= 1e-9 * self.fp_scale.max(1e-300)
    }
}

fn descending_jet(
    c: &[Complex64; 4],
    cx: &[Complex64; 4],
    cy: &[Complex64; 4],
    z: Complex64,
) -> Jet {
    let horner = |a: &[Complex64; 4]| ((a[0] * z + a[1]) * z + a[2]) * z + a[3];
    let zn = z.norm();
    Jet {
        f: horner(c),
        fx: horner(cx),
        fy: horner(cy),
        fp: (3.0 * c[0] * z + 2.0 * c[1]) * z + c[2],
        f_scale: c[0].norm() * zn * zn * zn
            + c[1].norm() * zn * zn
            + c[2].norm() * zn
            + c[3].norm(),
        fp_scale: 3.0 * c[0].norm() * zn * zn + 2.0 * c[1].norm() * zn + c[2].norm(),
    }
}

/// Cubic coefficients, their x/y-derivatives, and the discriminant compiled
/// to complex term lists for fast pointwise evaluation in tracing loops.
pub(crate) struct CompiledWeb {
    k: [CRatFn; 4],
    kx: [CRatFn; 4],
    ky: [CRatFn; 4],
    delta: CRatFn,
    delta_x: CRatFn,
    delta_y: CRatFn,
    lead_is_constant: bool,
}

impl CompiledWeb {
    pub(crate) fn new(ode: &CubicODE) -> Self {
        let delta = ode.discriminant();
        CompiledWeb {
            k: ode.coeffs().map(CRatFn::compile),
            kx: ode.coeffs().map(|c| CRatFn::compile(&c.diff(Var::X))),
            ky: ode.coeffs().map(|c| CRatFn::compile(&c.diff(Var::Y))),
            delta_x: CRatFn::compile(&delta.diff(Var::X)),
            delta_y: CRatFn::compile(&delta.diff(Var::Y)),
            delta: CRatFn::compile(&delta),
            lead_is_constant: ode.k3.constant_value().is_some(),
        }
    }

    /// Coefficient values and partials, descending powers of p; None when a
    /// coefficient hits a pole.
    fn coeff_values(
        &self,
        x: Complex64,
        y: Complex64,
    ) -> Option<([Complex64; 4], [Complex64; 4], [Complex64; 4])> {
        let zero = Complex64::new(0.0, 0.0);
        let (mut v, mut dx, mut dy) = ([zero; 4], [zero; 4], [zero; 4]);
        for i in 0..4 {
            v[i] = self.k[i].eval(x, y);
            dx[i] = self.kx[i].eval(x, y);
            dy[i] = self.ky[i].eval(x, y);
            if !(finite(v[i]) && finite(dx[i]) && finite(dy[i])) {
                return None;
            }
        }
        Some((v, dx, dy))
    }

    /// Jet of F(x, y, p) = K3 p³ + K2 p² + K1 p + K0 in the slope p.
    fn p_jet(&self, x: Complex64, y: Complex64, p: Complex64) -> Option<Jet> {
        let (v, dx, dy) = self.coeff_values(x, y)?;
        Some(descending_jet(&v, &dx, &dy, p))
    }

    /// Jet of G(x, y, q) = K0 q³ + K1 q² + K2 q + K3, the companion cubic in
    /// the inverse slope q = dx/dy.
    fn q_jet(&self, x: Complex64, y: Complex64, q: Complex64) -> Option<Jet> {
        let (v, dx, dy) = self.coeff_values(x, y)?;
        let rev = |a: [Complex64; 4]| [a[3], a[2], a[1], a[0]];
        Some(descending_jet(&rev(v), &rev(dx), &rev(dy), q))
    }

    /// First-order distance estimate to the discriminant zero set.
    pub(crate) fn clearance(&self, x: Complex64, y: Complex64) -> f64 {
        let v = self.delta.eval(x, y);
        if !finite(v) {
            return 0.0;
        }
        let gx = self.delta_x.eval(x, y);
        let gy = self.delta_y.eval(x, y);
        let grad = (gx.norm_sqr() + gy.norm_sqr()).sqrt();
        if !grad.is_finite() {
            return 0.0;
        }
        if grad == 0.0 {
            return if v.norm() == 0.0 { 0.0 } else { f64::INFINITY };
        }
        v.norm() / grad
    }

    /// Finite slope roots (lexicographically sorted) plus the multiplicity of
    /// the vertical direction dx = 0 carried by leading-coefficient decay.
    fn root_data(
        &self,
        x: Complex64,
        y: Complex64,
    ) -> Result<(Vec<Complex64>, u8), TraceError> {
        let (v, _, _) = self.coeff_values(x, y).ok_or_else(|| TraceError::LeftRegularDomain {
            what: format!("coefficient pole at ({x}, {y})"),
        })?;
        let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(TraceError::DegenerateAtPoint { x, y });
        }
        let lead = (0..4)
            .find(|&i| v[i].norm() > tol::ROOT_AT_INFINITY * scale)
            .expect("the max-norm coefficient passes its own threshold");
        let deg = 3 - lead;
        if deg == 0 {
            return Err(TraceError::DegenerateAtPoint { x, y });
        }
        let mut roots = if deg == 3 {
            numeric::cubic_roots(v[0], v[1], v[2], v[3]).to_vec()
        } else {
            let asc: Vec<Complex64> = (0..=deg).map(|d| v[3 - d]).collect();
            numeric::poly_roots(&asc)
        };
        roots.sort_by(numeric::lex_cmp);
        Ok((roots, (3 - deg) as u8))
    }
}

fn min_pairwise(values: &[Complex64]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..values.len() {
        for j in (i + 1)..values.len() {
            m = m.min((values[i] - values[j]).norm());
        }
    }
    m
}

/// Distance to the nearest candidate, its index, and the runner-up distance.
fn nearest_two(cands: &[Complex64], target: Complex64) -> (f64, usize, f64) {
    let (mut d1, mut i1, mut d2) = (f64::INFINITY, 0usize, f64::INFINITY);
    for (i, c) in cands.iter().enumerate() {
        let d = (c - target).norm();
        if d < d1 {
            d2 = d1;
            d1 = d;
            i1 = i;
        } else if d < d2 {
            d2 = d;
        }
    }
    (d1, i1, d2)
}

/// Projective tangent direction (dy : dx) of a web branch at a point.
#[derive(Clone, Copy, Debug)]
pub struct Direction {
    pub dy: Complex64,
    pub dx: Complex64,
}

impl Direction {
    pub fn finite(slope: Complex64) -> Self {
        Direction { dy: slope, dx: Complex64::new(1.0, 0.0) }
    }

    pub fn infinite() -> Self {
        Direction { dy: Complex64::new(1.0, 0.0), dx: Complex64::new(0.0, 0.0) }
    }

    pub fn is_vertical(&self) -> bool {
        self.dx.norm() == 0.0
    }

    /// Finite slope dy/dx; None for the vertical direction.
    pub fn slope(&self) -> Option<Complex64> {
        (!self.is_vertical()).then(|| self.dy / self.dx)
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.slope() {
            Some(p) => write!(f, "dy/dx = {p}"),
            None => write!(f, "dx = 0"),
        }
    }
}

/// Web directions at a point as (direction, multiplicity) pairs summing to
/// three: finite slopes sorted by (re, im), the vertical direction last.
/// Roots closer than the matching tolerance are reported as one cluster.
pub fn roots_at(
    ode: &CubicODE,
    point: (Complex64, Complex64),
) -> Result<Vec<(Direction, u8)>, TraceError> {
    let web = CompiledWeb::new(ode);
    let (roots, inf_mult) = web.root_data(point.0, point.1)?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    let ctol = tol::ROOT_MATCH * scale;

    let mut clusters: Vec<(Complex64, u8)> = Vec::new();
    for r in roots {
        match clusters
            .iter_mut()
            .find(|(mean, count)| (*mean / f64::from(*count) - r).norm() <= ctol)
        {
            Some((sum, count)) => {
                *sum += r;
                *count += 1;
            }
            None => clusters.push((r, 1)),
        }
    }
    let mut out: Vec<(Direction, u8)> = clusters
        .into_iter()
        .map(|(sum, count)| (Direction::finite(sum / f64::from(count)), count))
        .collect();
    out.sort_by(|a, b| numeric::lex_cmp(&a.0.dy, &b.0.dy));
    if inf_mult > 0 {
        out.push((Direction::infinite(), inf_mult));
    }
    Ok(out)
}

/// Permutation of the three root labels induced by continuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootPermutation {
    images: [usize; 3],
}

impl RootPermutation {
    /// Validates that the image list is a bijection of {0, 1, 2}.
    pub fn new(images: [usize; 3]) -> Option<Self> {
        let mut seen = [false; 3];
        for &i in &images {
            if i > 2 || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(RootPermutation { images })
    }

    pub fn identity() -> Self {
        RootPermutation { images: [0, 1, 2] }
    }

    pub fn images(&self) -> [usize; 3] {
        self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images == [0, 1, 2]
    }

    /// Permutation of performing `self` first and `then` second.
    pub fn compose(&self, then: &RootPermutation) -> RootPermutation {
        RootPermutation {
            images: [
                then.images[self.images[0]],
                then.images[self.images[1]],
                then.images[self.images[2]],
            ],
        }
    }

    /// Smallest k >= 1 with the k-th power equal to the identity.
    pub fn order(&self) -> usize {
        let mut acc = *self;
        for k in 1..=6 {
            if acc.is_identity() {
                return k;
            }
            acc = acc.compose(self);
        }
        unreachable!("permutations of three symbols have order at most 3")
    }
}

impl fmt::Display for RootPermutation {
    /// Cycle notation on 1-based labels; the identity prints as "id".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "id");
        }
        let mut seen = [false; 3];
        for start in 0..3 {
            if seen[start] || self.images[start] == start {
                continue;
            }
            write!(f, "({}", start + 1)?;
            seen[start] = true;
            let mut next = self.images[start];
            while next != start {
                write!(f, " {}", next + 1)?;
                seen[next] = true;
                next = self.images[next];
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Subgroup of S3 generated by a list of permutations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonodromyGroup {
    Trivial,
    Z2,
    Z3,
    S3,
}

impl fmt::Display for MonodromyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MonodromyGroup::Trivial => "trivial",
            MonodromyGroup::Z2 => "Z2",
            MonodromyGroup::Z3 => "Z3",
            MonodromyGroup::S3 => "S3",
        };
        write!(f, "{name}")
    }
}

/// Closure of the generators under composition, identified by its size
/// (subgroups of S3 have order 1, 2, 3, or 6).
pub fn monodromy_group(generators: &[RootPermutation]) -> MonodromyGroup {
    let mut set = vec![RootPermutation::identity()];
    for g in generators {
        if !set.contains(g) {
            set.push(*g);
        }
    }
    loop {
        let mut grown = false;
        for i in 0..set.len() {
            for j in 0..set.len() {
                let prod = set[i].compose(&set[j]);
                if !set.contains(&prod) {
                    set.push(prod);
                    grown = true;
                }
            }
        }
        if !grown {
            break;
        }
    }
    match set.len() {
        1 => MonodromyGroup::Trivial,
        2 => MonodromyGroup::Z2,
        3 => MonodromyGroup::Z3,
        _ => MonodromyGroup::S3,
    }
}

/// Worst first-order discriminant clearance over 256 path samples.
fn check_path_clearance(
    web: &CompiledWeb,
    path: &ParamLoop,
    min: f64,
) -> Result<(), TraceError> {
    let mut worst = f64::INFINITY;
    for k in 0..256 {
        let ((x, y), _) = path.at(k as f64 / 256.0);
        worst = worst.min(web.clearance(x, y));
    }
    if worst < min {
        return Err(TraceError::PathHitsDiscriminant {
            label: path.label.clone(),
            clearance: worst,
            min,
        });
    }
    Ok(())
}

fn polish_p_root(
    web: &CompiledWeb,
    x: Complex64,
    y: Complex64,
    start: Complex64,
) -> Option<Complex64> {
    let j0 = web.p_jet(x, y, start)?;
    let ftol = (1e-12 * j0.f_scale).max(1e-300);
    numeric::newton(
        |p| match web.p_jet(x, y, p) {
            Some(j) => (j.f, j.fp),
            None => (Complex64::new(f64::NAN, 0.0), Complex64::new(1.0, 0.0)),
        },
        start,
        ftol,
        20,
    )
}

/// Marches a root along the path by implicit-derivative prediction and exact
/// re-rooting, halving the step whenever the nearest-root match is not
/// clear-cut. The returned value is an exact root at the path endpoint.
fn continue_along(
    web: &CompiledWeb,
    path: &ParamLoop,
    start: Complex64,
    cfg: &TraceConfig,
) -> Result<Complex64, TraceError> {
    let ((x0, y0), _) = path.at(0.0);
    let mut p = polish_p_root(web, x0, y0, start).ok_or(TraceError::NotARoot { p: start })?;
    if (p - start).norm() > 0.05 * (1.0 + start.norm()) {
        return Err(TraceError::NotARoot { p: start });
    }

    const H_MAX: f64 = 1.0 / 32.0;
    let mut t = 0.0;
    let mut h: f64 = 1.0 / 64.0;
    while t < 1.0 - 1e-12 {
        let step = h.min(1.0 - t);
        let tn = t + step;
        let ((xa, ya), (vx, vy)) = path.at(t);
        let jet = web.p_jet(xa, ya, p).ok_or_else(|| TraceError::LeftRegularDomain {
            what: "coefficient pole on the continuation path".into(),
        })?;
        if jet.critical() {
            return Err(TraceError::MatchingAmbiguous { t });
        }
        let guess = p - (jet.fx * vx + jet.fy * vy) / jet.fp * step;

        let ((xn, yn), _) = path.at(tn);
        let (roots, _) = web.root_data(xn, yn)?;
        let sep = min_pairwise(&roots);
        if sep <= cfg.match_tol {
            return Err(TraceError::MatchingAmbiguous { t: tn });
        }
        let (d1, idx, d2) = nearest_two(&roots, guess);
        if d1 <= 0.25 * d2.min(sep) {
            p = roots[idx];
            t = tn;
            h = (h * 1.7).min(H_MAX);
        } else {
            h *= 0.5;
            if h < 1e-7 {
                return Err(TraceError::MatchingAmbiguous { t: tn });
            }
        }
    }
    Ok(p)
}

/// Continues `start_root` along the path by predictor-corrector marching.
/// The path must keep first-order clearance `cfg.disc_clearance` from the
/// discriminant; open paths work the same way as closed loops.
pub fn continue_root(
    ode: &CubicODE,
    path: &ParamLoop,
    start_root: Complex64,
    cfg: &TraceConfig,
) -> Result<Complex64, TraceError> {
    cfg.validate()?;
    let web = CompiledWeb::new(ode);
    check_path_clearance(&web, path, cfg.disc_clearance)?;
    continue_along(&web, path, start_root, cfg)
}

/// Permutation of the lexicographically ordered base-point roots induced by
/// continuing all three around the loop.
pub fn monodromy(
    ode: &CubicODE,
    lp: &ParamLoop,
    cfg: &TraceConfig,
) -> Result<RootPermutation, TraceError> {
    cfg.validate()?;
    let web = CompiledWeb::new(ode);
    check_path_clearance(&web, lp, cfg.disc_clearance)?;
    let ((x0, y0), _) = lp.at(0.0);
    let (start, inf_mult) = web.root_data(x0, y0)?;
    if inf_mult > 0 {
        return Err(TraceError::LeftRegularDomain {
            what: "a root passes through infinity at the loop base point".into(),
        });
    }
    if min_pairwise(&start) <= cfg.match_tol {
        return Err(TraceError::MatchingAmbiguous { t: 0.0 });
    }

    let mut images = [usize::MAX; 3];
    let mut used = [false; 3];
    for i in 0..3 {
        let end = continue_along(&web, lp, start[i], cfg)?;
        let (d1, j, _) = nearest_two(&start, end);
        if d1 > cfg.match_tol || used[j] {
            return Err(TraceError::MatchingAmbiguous { t: 1.0 });
        }
        images[i] = j;
        used[j] = true;
    }
    RootPermutation::new(images).ok_or(TraceError::MatchingAmbiguous { t: 1.0 })
}

/// Pointwise connection form of the presented equation, in the polynomial
/// coframe normalization K3·(p_j − p_k)(dy − p_i dx).
///
/// The coframe value is h_2 σ_1 − h_1 σ_2 with dσ_i = h_i Ω, computed from
/// exact root partials ∂p = −F_{x,y}/F_p; the K3 factor contributes
/// d ln K3. For a monic presentation this equals the value of
/// [`crate::webform::ReducedODE::chern_connection`]; multiplying the equation
/// by a function g(x, y) shifts the form by d ln g.
pub fn connection_at(
    ode: &CubicODE,
    point: (Complex64, Complex64),
) -> Result<Covector, WebError> {
    let web = CompiledWeb::new(ode);
    connection_core(ode, &web, point)
}

fn connection_core(
    ode: &CubicODE,
    web: &CompiledWeb,
    point: (Complex64, Complex64),
) -> Result<Covector, WebError> {
    let (x, y) = point;
    let frame = coframe_at(ode, point)?;
    let r = frame.roots;
    let zero = Complex64::new(0.0, 0.0);
    let (mut px, mut py) = ([zero; 3], [zero; 3]);
    for i in 0..3 {
        let jet = web.p_jet(x, y, r[i]).ok_or(WebError::CoframeInconsistent {
            x,
            y,
            detail: "coefficient evaluation failed at a coframe root".into(),
        })?;
        if jet.critical() {
            return Err(WebError::OnDiscriminant { x, y });
        }
        px[i] = -jet.fx / jet.fp;
        py[i] = -jet.fy / jet.fp;
    }
    // dσ_i = (∂x u + p_i ∂y u + u ∂y p_i) dx∧dy with u = p_j − p_k.
    let h = |i: usize, j: usize, k: usize| {
        (px[j] - px[k] + r[i] * (py[j] - py[k]) + (r[j] - r[k]) * py[i]) / frame.omega
    };
    let (h1, h2) = (h(0, 1, 2), h(1, 2, 0));
    let s = &frame.sigma;
    let mut gamma = Covector {
        dx: h2 * s[0].dx - h1 * s[1].dx,
        dy: h2 * s[0].dy - h1 * s[1].dy,
    };
    if !web.lead_is_constant {
        let k3 = web.k[0].eval(x, y);
        let k3x = web.kx[0].eval(x, y);
        let k3y = web.ky[0].eval(x, y);
        if !(finite(k3) && finite(k3x) && finite(k3y)) || k3.norm() == 0.0 {
            return Err(WebError::DirectionAtInfinity { x, y });
        }
        gamma.dx += k3x / k3;
        gamma.dy += k3y / k3;
    }
    Ok(gamma)
}

/// Normalized periods (1/2πi)∮γ of the numerically evaluated connection
/// along each loop. Works for non-monic presentations, where the symbolic
/// reduced-form route is unavailable.
pub fn connection_periods(
    ode: &CubicODE,
    loops: &[ParamLoop],
) -> Result<Vec<Complex64>, TraceError> {
    let web = CompiledWeb::new(ode);
    let two_pi_i = Complex64::new(0.0, std::f64::consts::TAU);
    let mut out = Vec::with_capacity(loops.len());
    for lp in loops {
        check_path_clearance(&web, lp, tol::DISC_CLEARANCE)?;
        let mut integrand = |t: f64| {
            let ((x, y), (vx, vy)) = lp.at(t);
            let gamma = connection_core(ode, &web, (x, y)).ok()?;
            let val = gamma.pair(vx, vy) / two_pi_i;
            finite(val).then_some(val)
        };
        match numeric::periodic_integral(&mut integrand, tol::PERIOD_QUADRATURE, 1 << 17) {
            Some((value, _)) => out.push(value),
            None => {
                return Err(TraceError::QuadratureDidNotConverge {
                    label: lp.label.clone(),
                    tol: tol::PERIOD_QUADRATURE,
                })
            }
        }
    }
    Ok(out)
}

/// Scalar web curvature K at a regular point, defined by dγ = K Ω.
///
/// Estimated through the integral form of the exterior derivative: the
/// circulation of the numeric connection around a small circle divided by
/// the enclosed area form, Richardson-extrapolated over two radii. Agrees
/// with the symbolic curvature form to a relative 1e-4 where that exists.
pub fn curvature_estimate(
    ode: &CubicODE,
    point: (Complex64, Complex64),
    cfg: &TraceConfig,
) -> Result<Complex64, TraceError> {
    cfg.validate()?;
    let web = CompiledWeb::new(ode);
    let (x, y) = point;
    let clearance = web.clearance(x, y);
    if clearance < cfg.disc_clearance {
        return Err(TraceError::Web(WebError::OnDiscriminant { x, y }));
    }
    let frame = coframe_at(ode, point)?;
    let r1 = (clearance / 3.0).min(0.05);
    let k1 = circulation_estimate(ode, &web, point, r1, frame.omega)?;
    let k2 = circulation_estimate(ode, &web, point, r1 / 2.0, frame.omega)?;
    Ok((4.0 * k2 - k1) / 3.0)
}

/// Circulation ∮γ around the real-plane circle of radius r divided by the
/// disk's area form πr²·ω(center); an O(r²)-biased estimate of K(center).
fn circulation_estimate(
    ode: &CubicODE,
    web: &CompiledWeb,
    center: (Complex64, Complex64),
    r: f64,
    omega: Complex64,
) -> Result<Complex64, TraceError> {
    let tau = std::f64::consts::TAU;
    let mut integrand = |t: f64| {
        let (sin, cos) = (tau * t).sin_cos();
        let x = center.0 + r * cos;
        let y = center.1 + r * sin;
        let vx = Complex64::new(-tau * r * sin, 0.0);
        let vy = Complex64::new(tau * r * cos, 0.0);
        let gamma = connection_core(ode, web, (x, y)).ok()?;
        let val = gamma.pair(vx, vy);
        finite(val).then_some(val)
    };
    let abs_tol = 1e-12 * omega.norm().max(1.0);
    let (circ, _) = numeric::periodic_integral(&mut integrand, abs_tol, 1 << 14).ok_or(
        TraceError::QuadratureDidNotConverge { label: "curvature circle".into(), tol: abs_tol },
    )?;
    Ok(circ / (std::f64::consts::PI * r * r * omega))
}

/// Active graph chart for leaf tracing: y as a function of x, or x as a
/// function of y where the leaf runs vertically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Chart {
    OverX,
    OverY,
}

fn polish_slope(
    web: &CompiledWeb,
    chart: Chart,
    x: Complex64,
    y: Complex64,
    start: Complex64,
) -> Option<Complex64> {
    let jet_at = |z: Complex64| match chart {
        Chart::OverX => web.p_jet(x, y, z),
        Chart::OverY => web.q_jet(x, y, z),
    };
    let j0 = jet_at(start)?;
    let ftol = (1e-12 * j0.f_scale).max(1e-300);
    numeric::newton(
        |z| match jet_at(z) {
            Some(j) => (j.f, j.fp),
            None => (Complex64::new(f64::NAN, 0.0), Complex64::new(1.0, 0.0)),
        },
        start,
        ftol,
        20,
    )
}

/// Traces the leaf through `seed` tangent to the branch `branch_index` of
/// [`roots_at`], parametrized by arclength up to |arc_length| (signed sign =
/// initial real march direction of the active chart variable). The polyline
/// stops early, without error, when the first-order discriminant clearance
/// drops below `cfg.disc_clearance` or the integrator reaches the critical
/// locus. Charts switch at |slope| > 2 so vertical passages stay regular.
pub fn trace_leaf(
    ode: &CubicODE,
    seed: (Complex64, Complex64),
    branch_index: usize,
    arc_length: f64,
    cfg: &TraceConfig,
) -> Result<Vec<(Complex64, Complex64)>, TraceError> {
    cfg.validate()?;
    if !(arc_length.is_finite() && arc_length != 0.0) {
        return Err(TraceError::BadInput { what: "arc_length must be nonzero and finite".into() });
    }
    let web = CompiledWeb::new(ode);
    let (mut x, mut y) = seed;
    if web.clearance(x, y) < cfg.disc_clearance {
        return Err(TraceError::SeedOnDiscriminant { x, y });
    }
    let directions = roots_at(ode, seed)?;
    let (dir, mult) = *directions.get(branch_index).ok_or_else(|| TraceError::BadInput {
        what: format!(
            "branch index {branch_index} out of range ({} directions)",
            directions.len()
        ),
    })?;
    if mult > 1 {
        return Err(TraceError::LeftRegularDomain {
            what: "the chosen direction is multiple at the seed".into(),
        });
    }
    let (mut chart, mut slope) = match dir.slope() {
        Some(p) if p.norm() <= 2.0 => (Chart::OverX, p),
        Some(p) => (Chart::OverY, p.inv()),
        None => (Chart::OverY, Complex64::new(0.0, 0.0)),
    };
    let mut u = arc_length.signum();
    let total = arc_length.abs();

    let mut points = vec![(x, y)];
    let mut done = 0.0;
    while done + 1e-12 < total {
        if web.clearance(x, y) < cfg.disc_clearance {
            break;
        }
        if slope.norm() > 2.0 {
            // Keep the curve direction across the chart change: the other
            // chart's variable was marching with the sign of Re(slope)·u.
            if slope.re < 0.0 {
                u = -u;
            }
            slope = slope.inv();
            chart = match chart {
                Chart::OverX => Chart::OverY,
                Chart::OverY => Chart::OverX,
            };
        }
        let chunk = cfg.max_step.min(total - done);
        let mut state = [x, y, slope];
        let active = chart;
        let mut field = |_t: f64, s: &[Complex64], d: &mut [Complex64]| -> bool {
            let (sx, sy, sl) = (s[0], s[1], s[2]);
            let jet = match active {
                Chart::OverX => web.p_jet(sx, sy, sl),
                Chart::OverY => web.q_jet(sx, sy, sl),
            };
            let Some(jet) = jet else { return false };
            if jet.critical() {
                return false;
            }
            let m = u / (1.0 + sl.norm_sqr()).sqrt();
            match active {
                Chart::OverX => {
                    d[0] = Complex64::new(m, 0.0);
                    d[1] = sl * m;
                    d[2] = -(jet.fx + jet.fy * sl) / jet.fp * m;
                }
                Chart::OverY => {
                    d[1] = Complex64::new(m, 0.0);
                    d[0] = sl * m;
                    d[2] = -(jet.fy + jet.fx * sl) / jet.fp * m;
                }
            }
            true
        };
        let res = numeric::rk45(&mut field, 0.0, chunk, &mut state, cfg.step_tol, chunk);
        let moved = (state[0] - x).norm() + (state[1] - y).norm() > 0.0;
        x = state[0];
        y = state[1];
        slope = state[2];
        match res {
            Ok(()) => {
                let polished = polish_slope(&web, chart, x, y, slope).ok_or_else(|| {
                    TraceError::LeftRegularDomain { what: "slope polish failed".into() }
                })?;
                if (polished - slope).norm() > 1e-3 * (1.0 + slope.norm()) {
                    return Err(TraceError::LeftRegularDomain {
                        what: "the integrated slope drifted off the solution branch".into(),
                    });
                }
                slope = polished;
                points.push((x, y));
                done += chunk;
            }
            Err(OdeStop::DerivativeFailed { .. }) | Err(OdeStop::StepUnderflow { .. }) => {
                // The state sits at the last accepted point, a valid leaf
                // point short of the critical locus.
                if moved {
                    points.push((x, y));
                }
                break;
            }
            Err(OdeStop::BudgetExhausted) => {
                return Err(TraceError::LeftRegularDomain {
                    what: "integration budget exhausted".into(),
                });
            }
        }
    }
    Ok(points)
}

/// Closed hexagon circuit around a regular point.
#[derive(Clone, Debug)]
pub struct HexagonResult {
    pub center: (Complex64, Complex64),
    pub radius: f64,
    /// Endpoint gap P7 − P1 as a complex coordinate pair.
    pub defect: (Complex64, Complex64),
    /// The seven marked vertices P1..P7; P1, P4, P7 lie on the starting leaf.
    pub vertices: Vec<(Complex64, Complex64)>,
}

impl HexagonResult {
    pub fn defect_norm(&self) -> f64 {
        (self.defect.0.norm_sqr() + self.defect.1.norm_sqr()).sqrt()
    }
}

/// Integrates the leaf with slope `slope_at_from` at `from` along the
/// straight x-plane segment to `x_target`; returns (y, slope) there.
fn integrate_leaf_to(
    web: &CompiledWeb,
    from: (Complex64, Complex64),
    slope_at_from: Complex64,
    x_target: Complex64,
    cfg: &TraceConfig,
    max_dx: f64,
) -> Result<(Complex64, Complex64), TraceError> {
    let (xa, ya) = from;
    let span = x_target - xa;
    if span.norm() <= 1e-15 * (1.0 + xa.norm()) {
        return Ok((ya, slope_at_from));
    }
    let mut state = [ya, slope_at_from];
    let mut field = |t: f64, s: &[Complex64], d: &mut [Complex64]| -> bool {
        let x = xa + span * t;
        let (yv, p) = (s[0], s[1]);
        let Some(jet) = web.p_jet(x, yv, p) else { return false };
        if jet.critical() {
            return false;
        }
        d[0] = p * span;
        d[1] = -(jet.fx + jet.fy * p) / jet.fp * span;
        true
    };
    let h_cap = (max_dx / span.norm()).clamp(1e-6, 0.25);
    numeric::rk45(&mut field, 0.0, 1.0, &mut state, cfg.step_tol, h_cap).map_err(|stop| {
        TraceError::LeftRegularDomain {
            what: format!("leaf integration stopped at the critical locus ({stop:?})"),
        }
    })?;
    let polished =
        polish_slope(web, Chart::OverX, x_target, state[0], state[1]).ok_or_else(|| {
            TraceError::LeftRegularDomain { what: "slope polish failed on a hexagon leg".into() }
        })?;
    if (polished - state[1]).norm() > 1e-3 * (1.0 + state[1].norm()) {
        return Err(TraceError::LeftRegularDomain {
            what: "the integrated slope drifted off the solution branch".into(),
        });
    }
    Ok((state[0], polished))
}

/// Root values at `point` labeled by continuation from the center's
/// lexicographically ordered roots along the straight segment.
fn labeled_roots(
    web: &CompiledWeb,
    center: (Complex64, Complex64),
    center_roots: &[Complex64; 3],
    point: (Complex64, Complex64),
    cfg: &TraceConfig,
) -> Result<[Complex64; 3], TraceError> {
    let (cx, cy) = center;
    let (px, py) = point;
    if (px - cx).norm() + (py - cy).norm() <= 1e-15 {
        return Ok(*center_roots);
    }
    let seg = ParamLoop::new("hexagon label segment", move |t| {
        ((cx + (px - cx) * t, cy + (py - cy) * t), (px - cx, py - cy))
    });
    let zero = Complex64::new(0.0, 0.0);
    let mut out = [zero; 3];
    for i in 0..3 {
        out[i] = continue_along(web, &seg, center_roots[i], cfg)?;
    }
    if min_pairwise(&out) <= cfg.match_tol {
        return Err(TraceError::MatchingAmbiguous { t: 1.0 });
    }
    Ok(out)
}

/// Newton-solves, in the complex x coordinate, the intersection of the leaf
/// through `from` (slope `p_move`) with the rail leaf through `center`
/// (slope `p_rail`), seeded by the tangent-line model.
fn solve_hop(
    web: &CompiledWeb,
    from: (Complex64, Complex64),
    p_move: Complex64,
    center: (Complex64, Complex64),
    p_rail: Complex64,
    cfg: &TraceConfig,
    max_dx: f64,
    radius: f64,
) -> Result<(Complex64, Complex64), TraceError> {
    let (xa, ya) = from;
    let (cx, cy) = center;
    let denom = p_move - p_rail;
    if denom.norm() <= 1e-9 * (1.0 + p_move.norm()) {
        return Err(TraceError::LeftRegularDomain {
            what: "two foliations run parallel at a hexagon hop".into(),
        });
    }
    let mut xg = (cy - ya + p_move * xa - p_rail * cx) / denom;
    let atol = (1e-3 * cfg.step_tol).max(1e-14) * (1.0 + cy.norm());
    for _ in 0..40 {
        if (xg - cx).norm() > 25.0 * radius {
            return Err(TraceError::LeftRegularDomain {
                what: "a hexagon hop diverged from the center".into(),
            });
        }
        let (ym, pm) = integrate_leaf_to(web, from, p_move, xg, cfg, max_dx)?;
        let (yr, pr) = integrate_leaf_to(web, center, p_rail, xg, cfg, max_dx)?;
        let g = ym - yr;
        if g.norm() <= atol {
            return Ok((xg, ym));
        }
        let gp = pm - pr;
        if gp.norm() <= 1e-9 * (1.0 + pm.norm()) {
            return Err(TraceError::LeftRegularDomain {
                what: "the moving leaf meets the rail tangentially".into(),
            });
        }
        let step = g / gp;
        if !finite(step) {
            return Err(TraceError::LeftRegularDomain {
                what: "a hexagon hop produced a non-finite Newton step".into(),
            });
        }
        xg -= step;
    }
    Err(TraceError::LeftRegularDomain { what: "a hexagon hop did not converge".into() })
}

/// Builds the six-leaf closure circuit around `center`.
///
/// The three rails are the leaves through the center. Starting from P1 on
/// rail 1 at first-order arclength `radius`, the legs alternate foliations
/// in the fixed schedule 2, 1, 3, 2, 1, 3, landing on rails 3, 2, 1, 3, 2, 1;
/// the defect is the endpoint gap P7 − P1, zero exactly for hexagonal webs.
/// Vertices are intersections of numerically integrated leaves, solved by
/// Newton iteration in the complex x coordinate.
pub fn hexagon_closure(
    ode: &CubicODE,
    center: (Complex64, Complex64),
    radius: f64,
    cfg: &TraceConfig,
) -> Result<HexagonResult, TraceError> {
    cfg.validate()?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(TraceError::BadInput { what: "radius must be positive".into() });
    }
    let web = CompiledWeb::new(ode);
    let (cx, cy) = center;
    if web.clearance(cx, cy) < cfg.disc_clearance {
        return Err(TraceError::SeedOnDiscriminant { x: cx, y: cy });
    }
    let frame = coframe_at(ode, center)?;
    let center_roots = frame.roots;
    if min_pairwise(&center_roots) <= cfg.match_tol {
        return Err(TraceError::MatchingAmbiguous { t: 0.0 });
    }
    let max_dx = cfg.max_step.min(radius / 4.0).max(1e-9);

    let dx1 = radius / (1.0 + center_roots[0].norm_sqr()).sqrt();
    let x1 = cx + dx1;
    let (y1, _) = integrate_leaf_to(&web, center, center_roots[0], x1, cfg, max_dx)?;
    let start = (x1, y1);

    // Foliation followed on each leg and the rail it lands on (0-based).
    const LEG_FOLIATION: [usize; 6] = [1, 0, 2, 1, 0, 2];
    const LEG_RAIL: [usize; 6] = [2, 1, 0, 2, 1, 0];

    let mut vertices = vec![start];
    let mut current = start;
    for leg in 0..6 {
        let labels = labeled_roots(&web, center, &center_roots, current, cfg)?;
        let p_move = labels[LEG_FOLIATION[leg]];
        let p_rail = center_roots[LEG_RAIL[leg]];
        current = solve_hop(&web, current, p_move, center, p_rail, cfg, max_dx, radius)?;
        vertices.push(current);
    }
    let defect = (current.0 - start.0, current.1 - start.1);
    Ok(HexagonResult { center, radius, defect, vertices })
}

/// Axis-aligned rectangle in the real (x, y) plane.
#[derive(Clone, Copy, Debug)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    fn valid(&self) -> bool {
        [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    fn expanded(&self, frac: f64) -> Region {
        let (dx, dy) = (self.x_max - self.x_min, self.y_max - self.y_min);
        Region {
            x_min: self.x_min - frac * dx,
            x_max: self.x_max + frac * dx,
            y_min: self.y_min - frac * dy,
            y_max: self.y_max + frac * dy,
        }
    }
}

/// Zero-level segments of Re Δ on an n×n marching-squares grid, in world
/// coordinates. Cells with non-finite values are skipped.
fn discriminant_segments(
    ode: &CubicODE,
    region: &Region,
    n: usize,
) -> Vec<((f64, f64), (f64, f64))> {
    let delta = CRatFn::compile(&ode.discriminant());
    let xs: Vec<f64> = (0..=n)
        .map(|i| region.x_min + (region.x_max - region.x_min) * i as f64 / n as f64)
        .collect();
    let ys: Vec<f64> = (0..=n)
        .map(|j| region.y_min + (region.y_max - region.y_min) * j as f64 / n as f64)
        .collect();
    let mut values = vec![f64::NAN; (n + 1) * (n + 1)];
    for i in 0..=n {
        for j in 0..=n {
            let v = delta.eval(Complex64::new(xs[i], 0.0), Complex64::new(ys[j], 0.0));
            if finite(v) {
                values[i * (n + 1) + j] = v.re;
            }
        }
    }

    let mut segments = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v00 = values[i * (n + 1) + j];
            let v10 = values[(i + 1) * (n + 1) + j];
            let v11 = values[(i + 1) * (n + 1) + j + 1];
            let v01 = values[i * (n + 1) + j + 1];
            if !(v00.is_finite() && v10.is_finite() && v11.is_finite() && v01.is_finite()) {
                continue;
            }
            let bits = usize::from(v00 > 0.0)
                | usize::from(v10 > 0.0) << 1
                | usize::from(v11 > 0.0) << 2
                | usize::from(v01 > 0.0) << 3;
            if bits == 0 || bits == 15 {
                continue;
            }
            let lerp = |a: f64, b: f64| a / (a - b);
            // Crossing points on the four cell edges in world coordinates.
            let e0 = (xs[i] + lerp(v00, v10) * (xs[i + 1] - xs[i]), ys[j]);
            let e1 = (xs[i + 1], ys[j] + lerp(v10, v11) * (ys[j + 1] - ys[j]));
            let e2 = (xs[i] + lerp(v01, v11) * (xs[i + 1] - xs[i]), ys[j + 1]);
            let e3 = (xs[i], ys[j] + lerp(v00, v01) * (ys[j + 1] - ys[j]));
            let mut push = |a: (f64, f64), b: (f64, f64)| segments.push((a, b));
            match bits {
                1 | 14 => push(e3, e0),
                2 | 13 => push(e0, e1),
                3 | 12 => push(e3, e1),
                4 | 11 => push(e1, e2),
                6 | 9 => push(e0, e2),
                7 | 8 => push(e3, e2),
                5 => {
                    push(e3, e0);
                    push(e1, e2);
                }
                10 => {
                    push(e0, e1);
                    push(e3, e2);
                }
                _ => {}
            }
        }
    }
    segments
}

/// Renders the real slice of the web as a standalone SVG 1.1 document.
///
/// From each seed, every simple real branch is traced in both directions and
/// drawn in the stroke style of its local branch index; the real
/// discriminant locus is overlaid on top. Following the classical figures,
/// the y-axis runs horizontally (rightward) and the x-axis vertically
/// (upward). Output is deterministic for fixed inputs.
pub fn render_svg(
    ode: &CubicODE,
    region: &Region,
    seeds: &[(f64, f64)],
    cfg: &TraceConfig,
) -> Result<String, TraceError> {
    cfg.validate()?;
    if !region.valid() {
        return Err(TraceError::BadInput { what: "region must be a nonempty rectangle".into() });
    }
    const SIZE: f64 = 800.0;
    const PAD: f64 = 20.0;
    let to_screen = |wx: f64, wy: f64| -> (f64, f64) {
        let u = PAD + (wy - region.y_min) / (region.y_max - region.y_min) * SIZE;
        let v = PAD + (region.x_max - wx) / (region.x_max - region.x_min) * SIZE;
        (u, v)
    };
    let path_d = |points: &[(f64, f64)]| -> String {
        let mut d = String::new();
        for (k, &(wx, wy)) in points.iter().enumerate() {
            let (u, v) = to_screen(wx, wy);
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{u:.2} {v:.2} ");
        }
        d.trim_end().to_string()
    };

    let mut leaf_paths: Vec<(usize, String)> = Vec::new();
    let margin = region.expanded(0.04);
    let diag = ((region.x_max - region.x_min).powi(2) + (region.y_max - region.y_min).powi(2))
        .sqrt();
    for &(sx, sy) in seeds {
        if !region.contains(sx, sy) {
            continue;
        }
        let seed = (Complex64::new(sx, 0.0), Complex64::new(sy, 0.0));
        let Ok(directions) = roots_at(ode, seed) else { continue };
        for (bi, (dir, mult)) in directions.iter().enumerate() {
            if *mult != 1 {
                continue;
            }
            let real_branch = match dir.slope() {
                Some(p) => p.im.abs() <= 1e-9 * (1.0 + p.norm()),
                None => true,
            };
            if !real_branch {
                continue;
            }
            let Ok(fwd) = trace_leaf(ode, seed, bi, 2.5 * diag, cfg) else { continue };
            let Ok(bwd) = trace_leaf(ode, seed, bi, -2.5 * diag, cfg) else { continue };
            let mut pts: Vec<(f64, f64)> = Vec::with_capacity(fwd.len() + bwd.len());
            pts.extend(bwd.iter().rev().map(|&(x, y)| (x.re, y.re)));
            pts.extend(fwd.iter().skip(1).map(|&(x, y)| (x.re, y.re)));
            // Split at region exits so re-entering arcs become subpaths.
            let mut run: Vec<(f64, f64)> = Vec::new();
            for &(wx, wy) in &pts {
                if margin.contains(wx, wy) {
                    run.push((wx, wy));
                } else if run.len() >= 2 {
                    leaf_paths.push((bi, path_d(&run)));
                    run.clear();
                } else {
                    run.clear();
                }
            }
            if run.len() >= 2 {
                leaf_paths.push((bi, path_d(&run)));
            }
        }
    }

    let mut disc_d = String::new();
    for ((ax, ay), (bx, by)) in discriminant_segments(ode, region, 160) {
        let (u1, v1) = to_screen(ax, ay);
        let (u2, v2) = to_screen(bx, by);
        let _ = write!(disc_d, "M{u1:.2} {v1:.2} L{u2:.2} {v2:.2} ");
    }

    let total = SIZE + 2.0 * PAD;
    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        svg,
        "<style>\n\
         .f0 {{ fill: none; stroke: #1f77b4; stroke-width: 1.6; }}\n\
         .f1 {{ fill: none; stroke: #d62728; stroke-width: 1.6; stroke-dasharray: 7 4; }}\n\
         .f2 {{ fill: none; stroke: #2ca02c; stroke-width: 1.6; stroke-dasharray: 2 3.5; }}\n\
         .disc {{ fill: none; stroke: #111111; stroke-width: 2.6; }}\n\
         </style>"
    );
    let _ = writeln!(svg, r##"<rect width="{total}" height="{total}" fill="#ffffff"/>"##);
    for (bi, d) in &leaf_paths {
        let _ = writeln!(svg, r#"<path class="f{bi}" d="{d}"/>"#);
    }
    if !disc_d.is_empty() {
        let _ = writeln!(svg, r#"<path class="disc" d="{}"/>"#, disc_d.trim_end());
    }
    let _ = writeln!(svg, "</svg>");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_ode;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn re(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn cfg() -> TraceConfig {
        TraceConfig::default()
    }

    #[test]
    fn roots_with_multiplicities_at_marked_points() {
        let simple = parse_ode("p^3 + p").unwrap();
        let dirs = roots_at(&simple, (re(0.0), re(0.0))).unwrap();
        assert_eq!(dirs.len(), 3);
        let expect = [c(0.0, -1.0), c(0.0, 0.0), c(0.0, 1.0)];
        for ((dir, mult), want) in dirs.iter().zip(expect) {
            assert_eq!(*mult, 1);
            assert!((dir.slope().unwrap() - want).norm() < 1e-12);
        }

        let cusp = parse_ode("p^3 + x*p - y").unwrap();
        let dirs = roots_at(&cusp, (re(0.0), re(0.0))).unwrap();
        assert_eq!(dirs.len(), 1);
        assert_eq!(dirs[0].1, 3);
        assert!(dirs[0].0.slope().unwrap().norm() < 1e-12);

        // One horizontal branch and a double vertical direction.
        let product = parse_ode("p*(x^2*y^2*p^2 + 1)").unwrap();
        let dirs = roots_at(&product, (re(0.0), re(0.0))).unwrap();
        assert_eq!(dirs.len(), 2);
        assert!(dirs[0].0.slope().unwrap().norm() < 1e-12);
        assert_eq!(dirs[0].1, 1);
        assert!(dirs[1].0.is_vertical());
        assert_eq!(dirs[1].1, 2);

        // Degree zero in p at y = 0: no direction data.
        let degenerate = parse_ode("y*p^3 + y*p + 1").unwrap();
        assert!(matches!(
            roots_at(&degenerate, (re(0.3), re(0.0))),
            Err(TraceError::DegenerateAtPoint { .. })
        ));
    }

    #[test]
    fn continuation_is_constant_for_constant_webs() {
        let ode = parse_ode("p^3 + p + 1").unwrap();
        let lp = ParamLoop::circle_x("x-loop", re(0.0), 1.0, re(0.0));
        let dirs = roots_at(&ode, (re(1.0), re(0.0))).unwrap();
        for (dir, _) in dirs {
            let start = dir.slope().unwrap();
            let end = continue_root(&ode, &lp, start, &cfg()).unwrap();
            assert!((end - start).norm() < 1e-10, "moved by {}", (end - start).norm());
        }
    }

    #[test]
    fn cube_root_web_has_three_cycle_monodromy() {
        let ode = parse_ode("p^3 - x*y^6").unwrap();
        let lp = ParamLoop::circle_x("x-loop", re(0.0), 1.0, re(1.0));

        // The root 1 at (1, 1) returns as the primitive cube root of unity.
        let end = continue_root(&ode, &lp, re(1.0), &cfg()).unwrap();
        let third = c(-0.5, 0.75f64.sqrt());
        assert!((end - third).norm() < 1e-8, "got {end}");

        let perm = monodromy(&ode, &lp, &cfg()).unwrap();
        assert_eq!(perm.order(), 3);
        assert_eq!(perm.images(), [2, 0, 1]);
        assert_eq!(monodromy_group(&[perm]), MonodromyGroup::Z3);
    }

    #[test]
    fn square_root_web_has_transposition_monodromy() {
        let ode = parse_ode("p*(p^2 - x*y^4)").unwrap();
        let lp = ParamLoop::circle_x("x-loop", re(0.0), 1.0, re(1.0));
        let perm = monodromy(&ode, &lp, &cfg()).unwrap();
        // Base roots sorted as [-1, 0, 1]; the square-root pair swaps.
        assert_eq!(perm.images(), [2, 1, 0]);
        assert_eq!(perm.order(), 2);
        assert_eq!(monodromy_group(&[perm]), MonodromyGroup::Z2);
    }

    #[test]
    fn null_homotopic_loops_give_the_identity() {
        let ode = parse_ode("p^3 + p + (1/10)*x").unwrap();
        let lp = ParamLoop::circle_x("small", re(0.0), 0.5, re(0.0));
        let perm = monodromy(&ode, &lp, &cfg()).unwrap();
        assert!(perm.is_identity());
        assert_eq!(monodromy_group(&[perm]), MonodromyGroup::Trivial);

        // A loop away from the branch locus of the cube-root web.
        let cube = parse_ode("p^3 - x*y^6").unwrap();
        let away = ParamLoop::circle_x("away", re(3.0), 0.5, re(1.0));
        assert!(monodromy(&cube, &away, &cfg()).unwrap().is_identity());
    }

    #[test]
    fn loops_crossing_the_discriminant_are_rejected() {
        let ode = parse_ode("p^3 - x*y^6").unwrap();
        let lp = ParamLoop::circle_x("through-zero", re(1.0), 1.0, re(1.0));
        assert!(matches!(
            monodromy(&ode, &lp, &cfg()),
            Err(TraceError::PathHitsDiscriminant { .. })
        ));
    }

    fn concat(a: &ParamLoop, b: &ParamLoop) -> ParamLoop {
        let (a, b) = (a.clone(), b.clone());
        ParamLoop::new("concatenated", move |t| {
            if t < 0.5 {
                let (pos, (vx, vy)) = a.at(2.0 * t);
                (pos, (2.0 * vx, 2.0 * vy))
            } else {
                let (pos, (vx, vy)) = b.at(2.0 * t - 1.0);
                (pos, (2.0 * vx, 2.0 * vy))
            }
        })
    }

    #[test]
    fn monodromy_is_a_homomorphism_on_concatenated_loops() {
        let config = cfg();
        for src in ["p^3 - x*y^6", "p*(p^2 - x*y^4)"] {
            let ode = parse_ode(src).unwrap();
            let lp = ParamLoop::circle_x("x-loop", re(0.0), 1.0, re(1.0));
            let single = monodromy(&ode, &lp, &config).unwrap();
            let double = monodromy(&ode, &concat(&lp, &lp), &config).unwrap();
            assert_eq!(double, single.compose(&single), "web {src}");
        }
    }

    #[test]
    fn permutation_group_classification() {
        let id = RootPermutation::identity();
        let swap = RootPermutation::new([1, 0, 2]).unwrap();
        let cycle = RootPermutation::new([1, 2, 0]).unwrap();
        assert_eq!(monodromy_group(&[]), MonodromyGroup::Trivial);
        assert_eq!(monodromy_group(&[id]), MonodromyGroup::Trivial);
        assert_eq!(monodromy_group(&[swap]), MonodromyGroup::Z2);
        assert_eq!(monodromy_group(&[cycle]), MonodromyGroup::Z3);
        assert_eq!(monodromy_group(&[swap, cycle]), MonodromyGroup::S3);
        assert!(RootPermutation::new([0, 0, 1]).is_none());
        assert_eq!(format!("{cycle}"), "(1 2 3)");
        assert_eq!(format!("{id}"), "id");
    }

    #[test]
    fn horizontal_line_is_traced_exactly() {
        let ode = parse_ode("p^3 + p").unwrap();
        // Directions sorted (0,-1), (0,0), (0,1): the zero slope is index 1.
        let pts = trace_leaf(&ode, (re(0.0), re(0.0)), 1, 1.0, &cfg()).unwrap();
        assert!(pts.len() > 10);
        let (xe, _) = *pts.last().unwrap();
        assert!((xe - re(1.0)).norm() < 1e-9, "end x {xe}");
        for (_, y) in pts {
            assert!(y.norm() < 1e-12);
        }
    }

    /// Largest distance of the points from the chord through the endpoints.
    fn collinearity_defect(pts: &[(Complex64, Complex64)]) -> f64 {
        let (x0, y0) = pts[0];
        let (xe, ye) = *pts.last().unwrap();
        let (cx, cy) = (xe - x0, ye - y0);
        let chord = (cx.norm_sqr() + cy.norm_sqr()).sqrt();
        pts.iter()
            .map(|&(x, y)| ((x - x0) * cy - (y - y0) * cx).norm() / chord)
            .fold(0.0, f64::max)
    }

    #[test]
    fn line_web_leaves_are_straight() {
        let ode = parse_ode("p^3 + x*p - y").unwrap();
        for branch in 0..3 {
            let pts = trace_leaf(&ode, (re(1.0), re(1.0)), branch, 1.5, &cfg()).unwrap();
            assert!(pts.len() > 10, "branch {branch}");
            assert!(
                collinearity_defect(&pts) <= 1e-8,
                "branch {branch}: defect {}",
                collinearity_defect(&pts)
            );
        }
    }

    #[test]
    fn refined_traces_agree() {
        let ode = parse_ode("p^3 + 2*x*p + y").unwrap();
        let coarse = trace_leaf(&ode, (re(1.0), re(1.0)), 0, 2.0, &cfg()).unwrap();
        let fine_cfg = TraceConfig { step_tol: 1e-12, ..cfg() };
        let fine = trace_leaf(&ode, (re(1.0), re(1.0)), 0, 2.0, &fine_cfg).unwrap();
        assert_eq!(coarse.len(), fine.len());
        for ((xa, ya), (xb, yb)) in coarse.iter().zip(&fine) {
            assert!((xa - xb).norm() + (ya - yb).norm() < 1e-7);
        }
    }

    #[test]
    fn tracing_is_time_reversible() {
        let ode = parse_ode("p^3 + 2*x*p + y").unwrap();
        let seed = (re(1.0), re(1.0));
        let fwd = trace_leaf(&ode, seed, 0, 0.8, &cfg()).unwrap();
        let end = *fwd.last().unwrap();
        // Recover the branch at the endpoint from the final chord direction.
        let (xp, yp) = fwd[fwd.len() - 2];
        let slope_est = (end.1 - yp) / (end.0 - xp);
        let dirs = roots_at(&ode, end).unwrap();
        let branch = (0..dirs.len())
            .min_by(|&a, &b| {
                let da = (dirs[a].0.slope().unwrap() - slope_est).norm();
                let db = (dirs[b].0.slope().unwrap() - slope_est).norm();
                da.total_cmp(&db)
            })
            .unwrap();
        let bwd = trace_leaf(&ode, end, branch, -0.8, &cfg()).unwrap();
        let back = *bwd.last().unwrap();
        let err = (back.0 - seed.0).norm() + (back.1 - seed.1).norm();
        assert!(err <= 10.0 * cfg().step_tol, "returned {err:.3e} from the seed");
    }

    #[test]
    fn tracing_stops_at_the_discriminant() {
        // The real leaf of the line web through (1, 1) is tangent to the
        // discriminant at x = -3p^2 (p the real root of p^3 + p = 1).
        let ode = parse_ode("p^3 + x*p - y").unwrap();
        let pts = trace_leaf(&ode, (re(1.0), re(1.0)), 2, -5.0, &cfg()).unwrap();
        let (xe, _) = *pts.last().unwrap();
        assert!(xe.re > -1.4, "ran past the tangency: {}", xe.re);
        assert!(xe.re < -1.2, "stopped far from the tangency: {}", xe.re);

        let on_disc = trace_leaf(&ode, (re(0.0), re(0.0)), 0, 1.0, &cfg());
        assert!(matches!(on_disc, Err(TraceError::SeedOnDiscriminant { .. })));
    }

    #[test]
    fn vertical_passages_switch_charts() {
        // Circles (x-2)^2 + y^2 = c are leaves of (y p + x - 2)(p^2 + 1); a
        // long arc crosses vertical and horizontal tangents, forcing chart
        // flips in both directions.
        let ode = parse_ode("(y*p + x - 2)*(p^2 + 1)").unwrap();
        let seed = (re(3.0), re(0.25));
        let dirs = roots_at(&ode, seed).unwrap();
        let branch = dirs
            .iter()
            .position(|(d, _)| d.slope().map_or(false, |p| p.im.abs() < 1e-9))
            .expect("a real branch");
        assert!((dirs[branch].0.slope().unwrap() - re(-4.0)).norm() < 1e-9);
        let pts = trace_leaf(&ode, seed, branch, 5.0, &cfg()).unwrap();
        assert!(pts.len() > 50);
        let two = re(2.0);
        let c0 = (seed.0 - two) * (seed.0 - two) + seed.1 * seed.1;
        let mut min_x = f64::INFINITY;
        for &(x, y) in &pts {
            let level = (x - two) * (x - two) + y * y;
            assert!((level - c0).norm() < 1e-7, "left the circle at ({x}, {y})");
            assert!(x.im.abs() < 1e-9 && y.im.abs() < 1e-9, "left the real slice");
            min_x = min_x.min(x.re);
        }
        assert!(min_x < 1.5, "never crossed the vertical tangent: min x {min_x}");
    }

    #[test]
    fn connection_matches_the_symbolic_form_on_monic_webs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for src in ["p^3 + x*p - y", "p^3 + x*p + y", "p^3 + 2*x*p + y"] {
            let ode = parse_ode(src).unwrap();
            let gamma = ode.as_reduced().unwrap().chern_connection().unwrap();
            let mut checked = 0;
            while checked < 25 {
                let x = c(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
                let y = c(rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0));
                let Ok(numeric_gamma) = connection_at(&ode, (x, y)) else { continue };
                let sym_dx = gamma.dx.eval(x, y).unwrap();
                let sym_dy = gamma.dy.eval(x, y).unwrap();
                let scale = 1.0 + sym_dx.norm().max(sym_dy.norm());
                assert!(
                    (numeric_gamma.dx - sym_dx).norm() <= 1e-9 * scale,
                    "{src} dx at ({x}, {y})"
                );
                assert!(
                    (numeric_gamma.dy - sym_dy).norm() <= 1e-9 * scale,
                    "{src} dy at ({x}, {y})"
                );
                checked += 1;
            }
        }
    }

    #[test]
    fn connection_of_the_nonmonic_product_web() {
        // x^2 y^2 p^3 + p: the polynomial-coframe connection is dx/x.
        let ode = parse_ode("p*(x^2*y^2*p^2 + 1)").unwrap();
        for (x, y) in [(re(0.7), re(0.4)), (re(-1.1), re(0.8)), (c(0.5, 0.2), c(0.9, -0.3))] {
            let g = connection_at(&ode, (x, y)).unwrap();
            assert!((g.dx - x.inv()).norm() < 1e-9 * (1.0 + x.inv().norm()), "dx at {x}");
            assert!(g.dy.norm() < 1e-9, "dy at {y}");
        }

        // A constant lead rescaling leaves the connection unchanged.
        let doubled = parse_ode("2*p^3 + 2*x*p - 2*y").unwrap();
        let plain = parse_ode("p^3 + x*p - y").unwrap();
        let point = (re(1.2), re(0.7));
        let a = connection_at(&doubled, point).unwrap();
        let b = connection_at(&plain, point).unwrap();
        assert!((a.dx - b.dx).norm() + (a.dy - b.dy).norm() < 1e-10);
    }

    #[test]
    fn connection_periods_match_the_symbolic_route() {
        let ode = parse_ode("p^3 + x*p - y").unwrap();
        let lp = ParamLoop::circle_x("transversal", re(-3.0), 0.1, re(2.0));
        let numeric_period = connection_periods(&ode, &[lp.clone()]).unwrap()[0];
        let symbolic =
            crate::invariants::gamma_periods(&ode.as_reduced().unwrap(), &[lp]).unwrap()[0];
        assert!((numeric_period - symbolic).norm() < 1e-7);
        assert!((numeric_period - 0.5).norm() < 1e-7, "got {numeric_period}");
    }

    #[test]
    fn nonmonic_periods_are_logarithmic_residues() {
        let ode = parse_ode("p*(x^2*y^2*p^2 + 1)").unwrap();
        let around_x = ParamLoop::circle_x("x=0", re(0.0), 0.3, re(0.9));
        let around_y = ParamLoop::circle_y("y=0", re(0.0), 0.3, re(0.8));
        let periods = connection_periods(&ode, &[around_x, around_y]).unwrap();
        assert!((periods[0] - 1.0).norm() < 1e-6, "x=0 period {}", periods[0]);
        assert!(periods[1].norm() < 1e-6, "y=0 period {}", periods[1]);
    }

    #[test]
    fn curvature_vanishes_for_hexagonal_webs() {
        for src in ["p^3 + 2*x*p + y", "p^3 + x*p - y"] {
            let ode = parse_ode(src).unwrap();
            for point in [(re(1.0), re(1.0)), (re(-0.4), re(0.9))] {
                let k = curvature_estimate(&ode, point, &cfg()).unwrap();
                assert!(k.norm() <= 1e-8, "{src}: |K| = {:.3e}", k.norm());
            }
        }
    }

    #[test]
    fn curvature_matches_the_symbolic_two_form() {
        let ode = parse_ode("p^3 + x*p + y").unwrap();
        let reduced = ode.as_reduced().unwrap();
        let two_form = reduced.curvature_form().unwrap();
        for point in [(re(1.0), re(1.0)), (re(0.5), re(-0.8))] {
            let frame = coframe_at(&ode, point).unwrap();
            let sym = two_form.dxdy.eval(point.0, point.1).unwrap() / frame.omega;
            let est = curvature_estimate(&ode, point, &cfg()).unwrap();
            assert!(
                (est - sym).norm() <= 1e-4 * sym.norm(),
                "estimate {est} vs symbolic {sym}"
            );
        }

        let on_disc = curvature_estimate(&ode, (re(0.0), re(0.0)), &cfg());
        assert!(matches!(on_disc, Err(TraceError::Web(WebError::OnDiscriminant { .. }))));
    }

    #[test]
    fn hexagons_close_for_hexagonal_webs() {
        for src in ["p^3 + x*p - y", "p^3 + 2*x*p + y"] {
            let ode = parse_ode(src).unwrap();
            for radius in [0.1, 0.2] {
                let hex = hexagon_closure(&ode, (re(1.0), re(1.0)), radius, &cfg()).unwrap();
                assert_eq!(hex.vertices.len(), 7);
                assert!(
                    hex.defect_norm() <= 1e-8,
                    "{src} r={radius}: defect {:.3e}",
                    hex.defect_norm()
                );
            }
        }
    }

    #[test]
    fn hexagon_defect_detects_curvature() {
        let ode = parse_ode("p^3 + x*p + y").unwrap();
        let center = (re(1.0), re(1.0));
        let hex = hexagon_closure(&ode, center, 0.3, &cfg()).unwrap();
        let defect = hex.defect_norm();
        assert!(defect >= 1e-4, "defect {defect:.3e}");

        // Refinement-stable: halving the step tolerance moves it < 10%.
        let tight = TraceConfig { step_tol: 0.5e-10, ..cfg() };
        let refined = hexagon_closure(&ode, center, 0.3, &tight).unwrap().defect_norm();
        assert!((refined - defect).abs() <= 0.1 * defect, "{defect:.6e} vs {refined:.6e}");

        // Shrinks with the radius (third-order contact at the center).
        let smaller = hexagon_closure(&ode, center, 0.15, &cfg()).unwrap().defect_norm();
        assert!(smaller < 0.5 * defect, "r/2 defect {smaller:.3e} vs {defect:.3e}");

        let on_disc = hexagon_closure(&ode, (re(0.0), re(0.0)), 0.1, &cfg());
        assert!(matches!(on_disc, Err(TraceError::SeedOnDiscriminant { .. })));
    }

    #[test]
    fn hexagon_vertices_stay_near_the_center() {
        let ode = parse_ode("p^3 + 2*x*p + y").unwrap();
        let center = (re(1.0), re(1.0));
        let hex = hexagon_closure(&ode, center, 0.2, &cfg()).unwrap();
        assert_eq!(hex.radius, 0.2);
        for (x, y) in &hex.vertices {
            let d = ((x - center.0).norm_sqr() + (y - center.1).norm_sqr()).sqrt();
            assert!(d <= 1.0, "vertex at distance {d}");
            assert!(d >= 0.01, "vertex collapsed onto the center");
        }
        let first = hex.vertices[0];
        let last = hex.vertices[6];
        assert!((last.0 - first.0 - hex.defect.0).norm() < 1e-15);
        assert!((last.1 - first.1 - hex.defect.1).norm() < 1e-15);
    }

    #[test]
    fn svg_rendering_is_deterministic() {
        let ode = parse_ode("p^3 + x*p - y").unwrap();
        let region = Region { x_min: -2.0, x_max: 2.0, y_min: -2.0, y_max: 2.0 };
        let seeds = [(-1.5, 0.2), (-1.2, -0.3), (1.0, 1.0)];
        let first = render_svg(&ode, &region, &seeds, &cfg()).unwrap();
        let second = render_svg(&ode, &region, &seeds, &cfg()).unwrap();
        assert_eq!(first, second);
        assert!(first.starts_with("<?xml"));
        // Seeds in the three-real-root region draw all three families.
        for class in ["class=\"f0\"", "class=\"f1\"", "class=\"f2\"", "class=\"disc\""] {
            assert!(first.contains(class), "missing {class}");
        }
    }

    #[test]
    fn empty_seed_list_draws_only_the_discriminant() {
        let ode = parse_ode("p^3 + x*p - y").unwrap();
        let region = Region { x_min: -2.0, x_max: 2.0, y_min: -2.0, y_max: 2.0 };
        let svg = render_svg(&ode, &region, &[], &cfg()).unwrap();
        assert!(svg.contains("class=\"disc\""));
        assert!(!svg.contains("class=\"f"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
