//! Closed-form exponent algebra for the damped wave blow-up problem:
//! the quadratic gamma(p, n), the Strauss and Fujita exponents, the damping
//! threshold mu_*, the conjugate exponent, and admissibility checks for the
//! hypotheses of the critical blow-up theorem.

use crate::error::{Error, Result};

/// Relative tolerance under which p counts as equal to the critical
/// exponent p_S(n + mu). The theorem is stated at exact equality; numerical
/// inputs need a band.
pub const P_CRITICAL_REL_TOL: f64 = 1e-9;

/// One problem instance: dimension, damping, nonlinearity power, amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Spatial dimension (integer for admissibility; the exponent formulas
    /// themselves extend to real arguments).
    pub n: u32,
    /// Damping coefficient mu in the term mu/(1+t) u_t.
    pub mu: f64,
    /// Nonlinearity exponent in |u|^p.
    pub p: f64,
    /// Data amplitude epsilon.
    pub epsilon: f64,
}

impl ModelParams {
    pub fn new(n: u32, mu: f64, p: f64, epsilon: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::domain("ModelParams", "n must be >= 1"));
        }
        if !(mu >= 0.0) {
            return Err(Error::domain("ModelParams", format!("mu = {mu} must be >= 0")));
        }
        if !(p > 1.0) {
            return Err(Error::domain("ModelParams", format!("p = {p} must be > 1")));
        }
        if !(epsilon > 0.0) {
            return Err(Error::domain(
                "ModelParams",
                format!("epsilon = {epsilon} must be > 0"),
            ));
        }
        Ok(ModelParams { n, mu, p, epsilon })
    }
}

/// All derived exponents for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentReport {
    /// gamma(p, n + mu); zero exactly at the critical Strauss exponent.
    pub gamma_value: f64,
    /// p_S(n + mu).
    pub p_strauss: f64,
    /// p_F(n).
    pub p_fujita: f64,
    /// mu_*(n).
    pub mu_star: f64,
    /// q = (n - mu - 1)/2 - 1/p.
    pub q_value: f64,
    /// Hoelder conjugate p' = p/(p - 1).
    pub p_conjugate: f64,
}

/// Admissibility verdict with every violated hypothesis listed by name.
#[derive(Debug, Clone)]
pub struct AdmissibilityReport {
    pub report: ExponentReport,
    pub violations: Vec<String>,
}

impl AdmissibilityReport {
    pub fn admissible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// gamma(p, n) = 2 + (n+1) p - (n-1) p^2.
pub fn gamma_quadratic(p: f64, n: f64) -> f64 {
    2.0 + (n + 1.0) * p - (n - 1.0) * p * p
}

/// Strauss exponent p_S(n): the positive root of gamma(p, n) = 0.
pub fn strauss_exponent(n: f64) -> Result<f64> {
    if !(n > 1.0) {
        return Err(Error::domain(
            "strauss_exponent",
            format!("n = {n} must exceed 1 (denominator 2(n-1) vanishes)"),
        ));
    }
    let disc = n * n + 10.0 * n - 7.0;
    Ok((n + 1.0 + disc.sqrt()) / (2.0 * (n - 1.0)))
}

/// Fujita exponent p_F(n) = 1 + 2/n.
pub fn fujita_exponent(n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::domain("fujita_exponent", format!("n = {n} must be > 0")));
    }
    Ok(1.0 + 2.0 / n)
}

/// Damping threshold mu_*(n) = (n^2 + n + 2)/(n + 2), the value at which
/// p_F(n) = p_S(n + mu_*).
pub fn mu_star(n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::domain("mu_star", format!("n = {n} must be > 0")));
    }
    Ok((n * n + n + 2.0) / (n + 2.0))
}

/// Hoelder conjugate p' = p/(p-1).
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain("conjugate_exponent", format!("p = {p} must be > 1")));
    }
    Ok(p / (p - 1.0))
}

/// The test-function order q = (n - mu - 1)/2 - 1/p, without any
/// admissibility filtering.
pub fn critical_q_value(n: f64, mu: f64, p: f64) -> f64 {
    (n - mu - 1.0) / 2.0 - 1.0 / p
}

/// q for a parameter set, rejecting orders that violate the integrability
/// restriction q > -min(mu, 1) or the profile condition q > -mu/2.
/// Boundary cases are inadmissible (the restrictions are strict).
pub fn critical_q(params: &ModelParams) -> Result<f64> {
    let q = critical_q_value(params.n as f64, params.mu, params.p);
    let min_bound = -params.mu.min(1.0);
    let half_bound = -params.mu / 2.0;
    if q <= min_bound || q <= half_bound {
        return Err(Error::InadmissibleQ {
            q,
            min_bound,
            half_bound,
        });
    }
    Ok(q)
}

/// Full exponent report plus named diagnostics for every violated
/// hypothesis of the blow-up theorem. Never fails: violations are data.
pub fn check_admissible(params: &ModelParams) -> AdmissibilityReport {
    let n = params.n as f64;
    let shifted = n + params.mu;
    // n >= 1 and p > 1 guarantee these calls are in-domain.
    let p_strauss = strauss_exponent(shifted.max(1.0 + 1e-12)).unwrap_or(f64::NAN);
    let p_fujita = fujita_exponent(n).unwrap_or(f64::NAN);
    let mu_star_n = mu_star(n).unwrap_or(f64::NAN);
    let q_value = critical_q_value(n, params.mu, params.p);
    let p_conjugate = params.p / (params.p - 1.0);
    let report = ExponentReport {
        gamma_value: gamma_quadratic(params.p, shifted),
        p_strauss,
        p_fujita,
        mu_star: mu_star_n,
        q_value,
        p_conjugate,
    };

    let mut violations = Vec::new();
    if params.n < 2 {
        violations.push(format!("dimension: n = {} < 2", params.n));
    }
    if !(params.mu > 0.0) {
        violations.push(format!("damping: mu = {} is not > 0", params.mu));
    }
    if !(params.mu < mu_star_n) {
        violations.push(format!(
            "damping: mu = {} is not < mu_* = {mu_star_n}",
            params.mu
        ));
    }
    let rel_gap = (params.p - p_strauss).abs() / p_strauss.abs().max(1.0);
    if !(rel_gap <= P_CRITICAL_REL_TOL) {
        violations.push(format!(
            "criticality: |p - p_S(n+mu)| / p_S = {rel_gap:.3e} exceeds {P_CRITICAL_REL_TOL:.0e}"
        ));
    }
    let min_bound = -params.mu.min(1.0);
    if q_value <= min_bound || q_value <= -params.mu / 2.0 {
        violations.push(format!(
            "order: q = {q_value} violates q > -min(mu,1) = {min_bound} or q > -mu/2 = {}",
            -params.mu / 2.0
        ));
    }
    AdmissibilityReport { report, violations }
}
