//! Analysis of planar 3-webs cut out by implicit cubic ODEs
//! K3(x,y) p^3 + K2(x,y) p^2 + K1(x,y) p + K0(x,y) = 0,  p = dy/dx.
//!
//! The crate computes the Chern connection of the web of solutions, tests
//! hexagonality (flatness) symbolically and numerically, derives the five
//! classification invariants of weighted-homogeneous webs, and matches webs
//! against the embedded normal-form tables. Exact work happens over the
//! rationals; numeric work (root continuation, contour integration, hexagon
//! tracing, special functions) happens over `Complex64`.
//!
//! Entry points by theme:
//! - [`parser`]: text -> [`webform::CubicODE`].
//! - [`webform`]: discriminant, Chern connection, flatness test.
//! - [`symmetry`]: infinitesimal symmetries, weights, monomial substitutions.
//! - [`invariants`]: the five-invariant signature of a singular web germ.
//! - [`integrals`]: first integrals attached to a symmetry, abelian relation.
//! - [`special`]: the transcendental coefficient functions (tan/U/V/W) and
//!   their Legendre-function parametrizations.
//! - [`tracer`]: numeric leaves, monodromy, hexagon closure, SVG rendering.
//! - [`classify`]: embedded normal-form tables and signature matching.
//! - [`cli`]: the `hexweb` command-line front-end and verification suites.

pub mod algebra;
pub(crate) mod numeric;
pub mod parser;
pub mod tol;
pub mod webform;
pub mod symmetry;
pub mod invariants;
pub mod integrals;
pub mod series;
pub mod special;
pub mod tracer;
pub mod classify;
pub mod report;
pub mod cli;
