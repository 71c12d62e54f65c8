//! Second-kind modified Bessel function K_nu(t) of real order, evaluated
//! directly from the integral representation
//!
//!   K_nu(t) = int_0^inf exp(-t cosh z) cosh(nu z) dz,   t > 0,
//!
//! with the e^{-t} magnitude factored out so the quadrature works on an
//! O(1)-scaled integrand for every t in [1e-4, ~700]. Limiting forms and
//! the derivative recurrence are provided alongside as cross-checks.

use crate::error::{Error, Result};
use crate::quadrature::{PanelRule, QuadratureConfig};
use crate::special::gamma::gamma_fn;

/// One evaluation of K_nu(t) with its quadrature error estimate.
#[derive(Debug, Clone, Copy)]
pub struct BesselEval {
    pub order: f64,
    pub argument: f64,
    pub value: f64,
    pub est_abs_error: f64,
}

/// Truncation point Z with t(cosh Z - 1) - |nu| Z >= budget, so the
/// neglected tail is below e^{-budget} on the rescaled integrand.
fn truncation_point(nu: f64, t: f64, budget: f64) -> f64 {
    let a = nu.abs();
    let mut z = (1.0 + budget / t).acosh() + 1.0;
    for _ in 0..8 {
        z = (1.0 + (budget + a * z) / t).acosh() + 0.5;
    }
    z
}

/// The rescaled integral e^{t} K_nu(t) = int_0^inf e^{-t(cosh z - 1)}
/// cosh(nu z) dz, which stays in comfortable f64 range for every t > 0.
/// Second value is the accumulated error estimate on the same scale.
///
/// The truncated interval is covered by Gauss-Legendre panels graded
/// towards 0 (where the large-t integrand concentrates); panel widths are
/// capped so the exponential ramp of the small-t integrand is resolved to
/// machine accuracy. The 16- vs 10-point difference supplies the error
/// estimate, and panels are halved once if it misses the tolerance.
pub(crate) fn bessel_k_scaled(nu: f64, t: f64, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::domain(
            "bessel_k",
            format!("argument t = {t} must be positive"),
        ));
    }
    // cosh(nu z) is expanded into two exponentials so large-order
    // evaluations cannot hit inf * 0. The neglected tail is kept below
    // tolerance times the configured truncation bound.
    let budget = -(cfg.abs_tol.min(cfg.rel_tol) * cfg.truncation_bound).ln() + 12.0;
    let z_max = truncation_point(nu, t, budget);
    let a = nu.abs();
    let integrand = move |z: f64| {
        let w = -t * (z.cosh() - 1.0);
        0.5 * ((w + a * z).exp() + (w - a * z).exp())
    };

    let mut edges = vec![0.0];
    let mut h = (4.0 / (1.0 + t).sqrt()).min(1.6);
    let mut z = 0.0;
    while z < z_max {
        z = (z + h).min(z_max);
        edges.push(z);
        h = (h * 2.0).min(1.6);
    }

    let tail = (-budget).exp();
    for attempt in 0..3 {
        let fine = PanelRule::composite(&edges, 16);
        let coarse = PanelRule::composite(&edges, 10);
        let value = fine.integrate(&integrand);
        let err = (value - coarse.integrate(&integrand)).abs();
        if err <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) || attempt == 2 {
            if err > 10.0 * cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
                return Err(Error::NoConvergence {
                    what: "bessel_k",
                    residual: err,
                });
            }
            return Ok((value, err + tail));
        }
        edges = halve_edges(&edges);
    }
    unreachable!()
}

fn halve_edges(edges: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(edges.len() * 2);
    for w in edges.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]));
    }
    out.push(*edges.last().unwrap());
    out
}

/// K_nu(t) from the defining integral. Even in the order; positive for all
/// t > 0. Values below the f64 underflow threshold (t beyond ~745) come
/// back as 0 with a zero error estimate.
pub fn bessel_k(nu: f64, t: f64, cfg: &QuadratureConfig) -> Result<BesselEval> {
    let (hat, hat_err) = bessel_k_scaled(nu, t, cfg)?;
    let scale = (-t).exp();
    Ok(BesselEval {
        order: nu,
        argument: t,
        value: scale * hat,
        est_abs_error: scale * hat_err,
    })
}

/// dK_nu/dt via the recurrence -K_{nu+1}(t) + (nu/t) K_nu(t).
pub fn bessel_k_dt(nu: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let k_up = bessel_k(nu + 1.0, t, cfg)?;
    let k = bessel_k(nu, t, cfg)?;
    Ok(-k_up.value + nu / t * k.value)
}

/// Leading large-argument form sqrt(pi/(2t)) e^{-t}.
pub fn bessel_k_large_t(_nu: f64, t: f64) -> f64 {
    assert!(t > 0.0, "bessel_k_large_t needs t > 0");
    (std::f64::consts::PI / (2.0 * t)).sqrt() * (-t).exp()
}

/// Leading small-argument form: Gamma(|nu|)/2 (t/2)^{-|nu|} for nu != 0,
/// and -ln t for nu = 0.
pub fn bessel_k_small_t(nu: f64, t: f64) -> f64 {
    assert!(t > 0.0, "bessel_k_small_t needs t > 0");
    if nu == 0.0 {
        -t.ln()
    } else {
        let a = nu.abs();
        0.5 * gamma_fn(a).expect("|nu| > 0") * (0.5 * t).powf(-a)
    }
}

/// Relative residual of the modified Bessel equation
/// t^2 K'' + t K' - (t^2 + nu^2) K = 0, with K'' taken by fourth-order
/// central differences of the recurrence form of K'.
pub fn bessel_ode_residual(nu: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let h = (0.01 * (1.0 + t)).min(t / 5.0);
    let d = |tt: f64| bessel_k_dt(nu, tt, cfg);
    let stencil = |h: f64| -> Result<f64> {
        Ok(
            (-d(t + 2.0 * h)? + 8.0 * d(t + h)? - 8.0 * d(t - h)? + d(t - 2.0 * h)?)
                / (12.0 * h),
        )
    };
    // Richardson step lifts the fourth-order stencil to sixth order.
    let kpp = (16.0 * stencil(0.5 * h)? - stencil(h)?) / 15.0;
    let kp = bessel_k_dt(nu, t, cfg)?;
    let k = bessel_k(nu, t, cfg)?.value;
    let residual = t * t * kpp + t * kp - (t * t + nu * nu) * k;
    let scale = (t * t * kpp).abs() + (t * kp).abs() + ((t * t + nu * nu) * k).abs();
    Ok(residual.abs() / scale)
}
