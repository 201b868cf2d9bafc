//! Central numeric tolerances. Every floating comparison in the crate pulls
//! its threshold from here so the accuracy budget is auditable in one place.

/// Absolute error target for contour integration of the connection form.
/// Period values being matched are spaced at least ~1/6 apart (table residues
/// are small rationals), so 1e-8 leaves two orders of safety below the 1e-6
/// matching tolerance.
pub const PERIOD_QUADRATURE: f64 = 1e-8;

/// Local truncation error per step for leaf tracing and hexagon circuits.
pub const TRACE_STEP: f64 = 1e-10;

/// Agreement required between independently computed numeric curves
/// (parametrized vs directly integrated solutions, refined re-traces).
pub const CROSS_VALIDATION: f64 = 1e-6;

/// Relative tolerance when normalizing web coframes: |sigma1+sigma2+sigma3|
/// must not exceed this times max|sigma_i|.
pub const COFRAME_CLOSURE: f64 = 1e-12;

/// Relative tolerance for the three pairwise products sigma_i wedge sigma_j
/// agreeing with the common area form.
pub const COFRAME_AREA: f64 = 1e-10;

/// |denominator| below this at an evaluation point counts as a pole.
pub const POLE: f64 = 1e-12;

/// |discriminant| below this counts as sitting on the discriminant curve.
/// Scaled by the local coefficient magnitude before use.
pub const ON_DISCRIMINANT: f64 = 1e-9;

/// |leading coefficient| below this (relative to the largest coefficient)
/// sends one web direction through infinity; coframes refuse such points.
pub const ROOT_AT_INFINITY: f64 = 1e-12;

/// Minimum estimated distance a loop or traced path must keep from the
/// discriminant curve (estimate: |Delta| / |grad Delta|).
pub const DISC_CLEARANCE: f64 = 1e-3;

/// Two roots closer than this are treated as unresolvable by continuation
/// (matching would be a guess, so it is an error instead).
pub const ROOT_MATCH: f64 = 1e-6;

/// Residual ceiling for special-function identities checked by numerical
/// differentiation (Legendre equation, the linear ODEs behind U and V).
pub const SPECIAL_RESIDUAL: f64 = 1e-8;

/// Absolute error target for scalar special-function values (2F1, Legendre).
pub const SPECIAL_VALUE: f64 = 1e-10;

/// Default truncation order for series-backed normal-form coefficients.
pub const SERIES_ORDER: usize = 12;

/// Default tolerance for invariant matching in the classifier.
pub const CLASSIFY_MATCH: f64 = 1e-6;
