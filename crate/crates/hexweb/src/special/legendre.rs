//! Ferrers (on-the-cut) Legendre functions P^mu_nu and Q^mu_nu on (-1, 1),
//! evaluated through the hypergeometric series, with Q obtained from P at
//! orders +-mu by the sine reflection. Both functions extend analytically
//! across integer mu; near an integer order the raw formulas degenerate, so
//! values there are recovered by averaging over a small circle in the order
//! (the mean over the 8th roots of unity reproduces an analytic function to
//! O(radius^8)).

use super::gamma::complex_gamma;
use super::hyp::hyp2f1;
use super::SpecialError;
use num_complex::Complex64;
use std::f64::consts::TAU;

const NEAR_INT: f64 = 1e-6;
const CIRCLE_RADIUS: f64 = 1e-2;
const CIRCLE_POINTS: usize = 8;
const EDGE: f64 = 1e-12;

/// Legendre order and degree attached to a connection constant L through
/// mu = (1 - 1/(3L))/2 and nu = (1/L - 1)/2.
#[derive(Debug, Clone, Copy)]
pub struct LegendreParams {
    pub mu: Complex64,
    pub nu: Complex64,
    pub l: Complex64,
}

impl LegendreParams {
    /// Builds the pair for a connection constant. L = 0 has an elementary
    /// solution instead, and L = 1/(3(1-2k)) makes mu an integer, where the
    /// P/Q pair degenerates; both are rejected.
    pub fn from_connection_constant(l: Complex64) -> Result<Self, SpecialError> {
        if l.norm() < 1e-12 {
            return Err(SpecialError::OutOfDomain {
                what: "L = 0 is elementary and has no Legendre parametrization".into(),
            });
        }
        let one = Complex64::new(1.0, 0.0);
        let mu = 0.5 * (one - one / (3.0 * l));
        let nu = 0.5 * (one / l - one);
        if near_int(mu, 1e-9).is_some() {
            return Err(SpecialError::OutOfDomain {
                what: format!("L = {l} gives integer order mu = {mu}; the P/Q pair degenerates"),
            });
        }
        Ok(LegendreParams { mu, nu, l })
    }
}

fn near_int(z: Complex64, eps: f64) -> Option<i64> {
    let n = z.re.round();
    if (z.re - n).abs() <= eps && z.im.abs() <= eps && n.abs() < 1e15 {
        Some(n as i64)
    } else {
        None
    }
}

fn domain_guard(x: f64) -> Result<(), SpecialError> {
    if x.abs() < 1.0 - EDGE {
        Ok(())
    } else {
        Err(SpecialError::OutOfDomain {
            what: format!("Ferrers functions need x strictly inside (-1, 1), got {x}"),
        })
    }
}

/// (P^mu_nu(x), dP^mu_nu/dx) away from integer mu.
fn p_pair_raw(mu: Complex64, nu: Complex64, x: f64) -> Result<(Complex64, Complex64), SpecialError> {
    let one = Complex64::new(1.0, 0.0);
    let a = -nu;
    let b = nu + 1.0;
    let c = one - mu;
    let t = Complex64::new((1.0 - x) / 2.0, 0.0);
    let ratio = (1.0 + x) / (1.0 - x);
    let pref = (0.5 * mu * ratio.ln()).exp();
    let inv_gamma = one / complex_gamma(c);
    let f = hyp2f1(a, b, c, t)?;
    let fp = hyp2f1(a + 1.0, b + 1.0, c + 1.0, t)?;
    let p = pref * f * inv_gamma;
    // d/dx of the prefactor contributes mu/(1-x^2); the series argument
    // (1-x)/2 contributes -1/2 through F' = (ab/c) F(a+1, b+1; c+1; .).
    let dp = p * mu / (1.0 - x * x) - pref * inv_gamma * (a * b / c) * fp * 0.5;
    Ok((p, dp))
}

/// (Q^mu_nu(x), dQ^mu_nu/dx) away from integer mu, by reflection.
fn q_pair_raw(mu: Complex64, nu: Complex64, x: f64) -> Result<(Complex64, Complex64), SpecialError> {
    let pi = std::f64::consts::PI;
    let (p_plus, dp_plus) = p_pair_raw(mu, nu, x)?;
    let (p_minus, dp_minus) = p_pair_raw(-mu, nu, x)?;
    let ratio = complex_gamma(nu + mu + 1.0) / complex_gamma(nu - mu + 1.0);
    let front = pi / (2.0 * (pi * mu).sin());
    let cosm = (pi * mu).cos();
    Ok((
        front * (cosm * p_plus - ratio * p_minus),
        front * (cosm * dp_plus - ratio * dp_minus),
    ))
}

/// Mean of `f` over a small circle around mu, recovering the analytic value
/// when the raw formulas degenerate at the center.
fn average_over_mu<F>(f: F, mu: Complex64) -> Result<(Complex64, Complex64), SpecialError>
where
    F: Fn(Complex64) -> Result<(Complex64, Complex64), SpecialError>,
{
    let mut sum = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for k in 0..CIRCLE_POINTS {
        let angle = TAU * k as f64 / CIRCLE_POINTS as f64;
        let shifted = mu + CIRCLE_RADIUS * Complex64::new(angle.cos(), angle.sin());
        let (v, d) = f(shifted)?;
        sum.0 += v;
        sum.1 += d;
    }
    let n = CIRCLE_POINTS as f64;
    Ok((sum.0 / n, sum.1 / n))
}

fn p_pair(mu: Complex64, nu: Complex64, x: f64) -> Result<(Complex64, Complex64), SpecialError> {
    domain_guard(x)?;
    if near_int(mu, NEAR_INT).is_some() {
        average_over_mu(|m| p_pair_raw(m, nu, x), mu)
    } else {
        p_pair_raw(mu, nu, x)
    }
}

fn q_pair(mu: Complex64, nu: Complex64, x: f64) -> Result<(Complex64, Complex64), SpecialError> {
    domain_guard(x)?;
    if let Some(n) = near_int(nu + mu + 1.0, 1e-9) {
        if n <= 0 {
            return Err(SpecialError::OutOfDomain {
                what: format!("Q^mu_nu is undefined at nu + mu = {}", n - 1),
            });
        }
    }
    if near_int(mu, NEAR_INT).is_some() {
        average_over_mu(|m| q_pair_raw(m, nu, x), mu)
    } else {
        q_pair_raw(mu, nu, x)
    }
}

/// Ferrers function of the first kind P^mu_nu(x), x in (-1, 1).
pub fn ferrers_p(mu: Complex64, nu: Complex64, x: f64) -> Result<Complex64, SpecialError> {
    p_pair(mu, nu, x).map(|v| v.0)
}

/// d/dx of the Ferrers function of the first kind.
pub fn ferrers_p_dx(mu: Complex64, nu: Complex64, x: f64) -> Result<Complex64, SpecialError> {
    p_pair(mu, nu, x).map(|v| v.1)
}

/// Ferrers function of the second kind Q^mu_nu(x), x in (-1, 1).
pub fn ferrers_q(mu: Complex64, nu: Complex64, x: f64) -> Result<Complex64, SpecialError> {
    q_pair(mu, nu, x).map(|v| v.0)
}

/// d/dx of the Ferrers function of the second kind.
pub fn ferrers_q_dx(mu: Complex64, nu: Complex64, x: f64) -> Result<Complex64, SpecialError> {
    q_pair(mu, nu, x).map(|v| v.1)
}

/// P^mu_nu(x) at the orders attached to a connection constant.
pub fn legendre_p(params: &LegendreParams, x: f64) -> Result<Complex64, SpecialError> {
    ferrers_p(params.mu, params.nu, x)
}

/// Q^mu_nu(x) at the orders attached to a connection constant.
pub fn legendre_q(params: &LegendreParams, x: f64) -> Result<Complex64, SpecialError> {
    ferrers_q(params.mu, params.nu, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn connection_constant_parameter_map() {
        let p = LegendreParams::from_connection_constant(r(1.0)).unwrap();
        assert!((p.mu - r(1.0 / 3.0)).norm() < 1e-14);
        assert!(p.nu.norm() < 1e-14);
        let p = LegendreParams::from_connection_constant(r(-2.0 / 3.0)).unwrap();
        assert!((p.mu - r(0.75)).norm() < 1e-14);
        assert!((p.nu - r(-1.25)).norm() < 1e-14);
        assert!(LegendreParams::from_connection_constant(r(0.0)).is_err());
        // L = 1/3 gives mu = 0 and L = -1/3 gives mu = 1: degenerate pairs.
        assert!(LegendreParams::from_connection_constant(r(1.0 / 3.0)).is_err());
        assert!(LegendreParams::from_connection_constant(r(-1.0 / 3.0)).is_err());
    }

    #[test]
    fn integer_order_closed_forms() {
        // P^0_0 = 1 and P^0_1 = x, through the circle average.
        assert!((ferrers_p(r(0.0), r(0.0), 0.3).unwrap() - r(1.0)).norm() < 1e-10);
        assert!((ferrers_p(r(0.0), r(1.0), -0.42).unwrap() - r(-0.42)).norm() < 1e-10);
        // Q^0_0(x) = atanh(x): Q^0_0(1/2) = ln(3)/2.
        let q = ferrers_q(r(0.0), r(0.0), 0.5).unwrap();
        assert!((q - r(3.0_f64.ln() / 2.0)).norm() < 1e-9);
        // P^1_1(x) = -sqrt(1-x^2).
        let p = ferrers_p(r(1.0), r(1.0), 0.4).unwrap();
        assert!((p - r(-(1.0 - 0.16_f64).sqrt())).norm() < 1e-9, "got {p}");
    }

    #[test]
    fn half_integer_order_closed_forms() {
        // P^{1/2}_nu(cos t) = sqrt(2/(pi sin t)) cos((nu+1/2) t) and
        // Q^{1/2}_nu(cos t) = -sqrt(pi/(2 sin t)) sin((nu+1/2) t).
        let (theta, nu) = (1.1f64, 0.3f64);
        let x = theta.cos();
        let p = ferrers_p(r(0.5), r(nu), x).unwrap();
        let want = (2.0 / (PI * theta.sin())).sqrt() * ((nu + 0.5) * theta).cos();
        assert!((p - r(want)).norm() < 1e-11, "P got {p}, want {want}");
        let q = ferrers_q(r(0.5), r(nu), x).unwrap();
        let want = -(PI / (2.0 * theta.sin())).sqrt() * ((nu + 0.5) * theta).sin();
        assert!((q - r(want)).norm() < 1e-11, "Q got {q}, want {want}");
    }

    #[test]
    fn averaged_route_agrees_with_raw_at_generic_order() {
        let (mu, nu, x) = (r(0.35), r(0.8), 0.25);
        let raw = p_pair_raw(mu, nu, x).unwrap();
        let avg = average_over_mu(|m| p_pair_raw(m, nu, x), mu).unwrap();
        assert!((raw.0 - avg.0).norm() < 1e-11);
        assert!((raw.1 - avg.1).norm() < 1e-11);
    }

    fn stencil_dx<F: Fn(f64) -> Complex64>(f: F, x: f64, h: f64) -> Complex64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn analytic_derivatives_match_stencils() {
        let h = 1e-3;
        for (mu, nu, x) in [
            (r(0.37), r(0.82), 0.3),
            (r(1.0), r(0.6), -0.2),
            (r(-0.45), r(1.3), 0.1),
        ] {
            let dp = ferrers_p_dx(mu, nu, x).unwrap();
            let num = stencil_dx(|t| ferrers_p(mu, nu, t).unwrap(), x, h);
            assert!((dp - num).norm() < 1e-9 * dp.norm().max(1.0), "P' at mu={mu}");
            let dq = ferrers_q_dx(mu, nu, x).unwrap();
            let num = stencil_dx(|t| ferrers_q(mu, nu, t).unwrap(), x, h);
            assert!((dq - num).norm() < 1e-9 * dq.norm().max(1.0), "Q' at mu={mu}");
        }
    }

    /// (1-x^2) g'' - 2x g' + (nu(nu+1) - mu^2/(1-x^2)) g for a candidate
    /// solution, with g'' taken by a stencil over the analytic derivative.
    fn legendre_residual(
        value: &dyn Fn(f64) -> Complex64,
        slope: &dyn Fn(f64) -> Complex64,
        mu: Complex64,
        nu: Complex64,
        x: f64,
    ) -> (Complex64, f64) {
        let h = 1e-3;
        let g = value(x);
        let gp = slope(x);
        let gpp = (-slope(x + 2.0 * h) + 8.0 * slope(x + h) - 8.0 * slope(x - h)
            + slope(x - 2.0 * h))
            / (12.0 * h);
        let w = 1.0 - x * x;
        let res = w * gpp - 2.0 * x * gp + (nu * (nu + 1.0) - mu * mu / w) * g;
        let scale = (w * gpp).norm()
            + (2.0 * x * gp).norm()
            + (nu * (nu + 1.0) * g).norm()
            + (mu * mu / w * g).norm()
            + 1.0;
        (res, scale)
    }

    #[test]
    fn both_kinds_satisfy_the_legendre_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let mut checked = 0;
        while checked < 50 {
            let mu = r(rng.gen_range(-1.4..1.6));
            let nu = r(rng.gen_range(-0.45..2.3));
            let x = rng.gen_range(-0.55..0.7);
            // Stay away from the Q pole line nu + mu = -1, -2, ...
            let s = (nu + mu + 1.0).re;
            if s < 0.6 && (s - s.round()).abs() < 0.05 {
                continue;
            }
            let (res, scale) = legendre_residual(
                &|t| ferrers_p(mu, nu, t).unwrap(),
                &|t| ferrers_p_dx(mu, nu, t).unwrap(),
                mu,
                nu,
                x,
            );
            assert!(
                res.norm() <= crate::tol::SPECIAL_RESIDUAL * scale,
                "P residual {} at mu={mu} nu={nu} x={x}",
                res.norm()
            );
            let (res, scale) = legendre_residual(
                &|t| ferrers_q(mu, nu, t).unwrap(),
                &|t| ferrers_q_dx(mu, nu, t).unwrap(),
                mu,
                nu,
                x,
            );
            assert!(
                res.norm() <= crate::tol::SPECIAL_RESIDUAL * scale,
                "Q residual {} at mu={mu} nu={nu} x={x}",
                res.norm()
            );
            checked += 1;
        }
    }

    #[test]
    fn equation_holds_in_the_connection_region() {
        // x < -0.6 sends the hypergeometric argument through the 1-z
        // connection; the stencil stays inside that branch at x = -0.75.
        let (mu, nu) = (r(0.37), r(0.82));
        let (res, scale) = legendre_residual(
            &|t| ferrers_p(mu, nu, t).unwrap(),
            &|t| ferrers_p_dx(mu, nu, t).unwrap(),
            mu,
            nu,
            -0.75,
        );
        assert!(res.norm() <= crate::tol::SPECIAL_RESIDUAL * scale);
    }

    #[test]
    fn q_pole_and_domain_guards() {
        assert!(matches!(
            ferrers_q(r(0.5), r(-1.5), 0.3),
            Err(SpecialError::OutOfDomain { .. })
        ));
        assert!(ferrers_p(r(0.3), r(0.5), 1.0).is_err());
        assert!(ferrers_p(r(0.3), r(0.5), -1.2).is_err());
    }
}
