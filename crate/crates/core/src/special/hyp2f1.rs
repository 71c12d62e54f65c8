//! Gauss hypergeometric function F(alpha, beta, gamma; z) from the Euler
//! integral representation
//!
//!   Gamma(gamma)/(Gamma(beta) Gamma(gamma-beta))
//!       * int_0^1 t^{beta-1} (1-t)^{gamma-beta-1} (1-zt)^{-alpha} dt,
//!
//! valid for gamma > beta > 0 and |z| < 1. Endpoint power singularities
//! (beta < 1 or gamma - beta < 1) are removed by the substitutions
//! t = s^{1/beta} and 1 - t = w^{1/(gamma-beta)}.

use crate::error::{Error, Result};
use crate::quadrature::{adaptive_simpson, QuadratureConfig};
use crate::special::gamma::gamma_fn;

/// Evaluation record for F(alpha, beta, gamma; z).
#[derive(Debug, Clone, Copy)]
pub struct Hyp2f1Eval {
    pub value: f64,
    pub est_abs_error: f64,
    /// Set when z approaches 1 with alpha + beta >= gamma, where the
    /// function itself diverges as z -> 1 and accuracy degrades.
    pub near_singular: bool,
}

pub fn gauss_2f1(
    alpha: f64,
    beta: f64,
    gamma: f64,
    z: f64,
    cfg: &QuadratureConfig,
) -> Result<Hyp2f1Eval> {
    if !(gamma > beta && beta > 0.0) {
        return Err(Error::domain(
            "gauss_2f1",
            format!("need gamma > beta > 0, got beta = {beta}, gamma = {gamma}"),
        ));
    }
    if !(z.abs() < 1.0) {
        return Err(Error::domain(
            "gauss_2f1",
            format!("need |z| < 1, got z = {z}"),
        ));
    }

    let cb = gamma - beta;
    let left_smooth = move |t: f64| (1.0 - t).powf(cb - 1.0) * (1.0 - z * t).powf(-alpha);
    let right_smooth = move |t: f64| t.powf(beta - 1.0) * (1.0 - z * t).powf(-alpha);

    // [0, 1/2]: weight t^{beta-1}
    let left = if beta >= 1.0 {
        adaptive_simpson(
            |t| t.powf(beta - 1.0) * left_smooth(t),
            0.0,
            0.5,
            cfg,
            "gauss_2f1 left",
        )?
    } else {
        let upper = 0.5f64.powf(beta);
        adaptive_simpson(
            |s| left_smooth(s.powf(1.0 / beta)) / beta,
            0.0,
            upper,
            cfg,
            "gauss_2f1 left",
        )?
    };

    // [1/2, 1]: weight (1-t)^{gamma-beta-1}
    let right = if cb >= 1.0 {
        adaptive_simpson(
            |t| (1.0 - t).powf(cb - 1.0) * right_smooth(t),
            0.5,
            1.0,
            cfg,
            "gauss_2f1 right",
        )?
    } else {
        let upper = 0.5f64.powf(cb);
        adaptive_simpson(
            |w| right_smooth(1.0 - w.powf(1.0 / cb)) / cb,
            0.0,
            upper,
            cfg,
            "gauss_2f1 right",
        )?
    };

    let prefactor = gamma_fn(gamma)? / (gamma_fn(beta)? * gamma_fn(cb)?);
    Ok(Hyp2f1Eval {
        value: prefactor * (left.value + right.value),
        est_abs_error: prefactor.abs() * (left.abs_error + right.abs_error),
        near_singular: alpha + beta >= gamma && z > 0.9,
    })
}
