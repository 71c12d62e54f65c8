//! The Bessel-built test-function family for the conjugate equation
//! v_tt - Delta v - (mu/(1+t) v)_t = 0:
//!
//!   lambda_eta(t) = (eta(t+1))^{(mu+1)/2} K_{(mu-1)/2}(eta(t+1)),
//!   phi_eta(x)    = int_{S^{n-1}} e^{eta x.omega} d omega,
//!   b_q(x, t)     = int_0^1 lambda_eta(t) phi_eta(x) eta^{q-1} d eta,
//!
//! together with the companion family built on order (mu+1)/2, the
//! two-regime asymptotic profile of b_q, and psi = lambda_1 phi_1.
//!
//! All evaluators work on rescaled factors (e^{t} K(t), e^{-x} phi) so the
//! products stay inside f64 range even at large times, and the eta integral
//! is taken over fixed Gauss-Legendre panels in v = -ln(eta) so repeated
//! evaluations share abscissae and quadrature error cancels in finite
//! differences.

use crate::error::{Error, Result};
use crate::exponents;
use crate::quadrature::{adaptive_simpson, PanelRule, QuadratureConfig};
use crate::special::{bessel_k_scaled, gamma_fn};

/// Order parameter and model constants defining b_q and its tilde variant.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunctionSpec {
    /// Spatial dimension, n >= 2 (the plane-wave weight (1-theta^2)^{(n-3)/2}
    /// is integrable only there).
    pub n: u32,
    /// Damping coefficient.
    pub mu: f64,
    /// Order parameter q, restricted to q > -min(mu, 1) and q > -mu/2.
    pub q: f64,
    /// Tolerances for the eta integral.
    pub eta_quadrature: QuadratureConfig,
    /// Tolerances for the plane-wave theta integral.
    pub theta_quadrature: QuadratureConfig,
}

impl TestFunctionSpec {
    pub fn new(n: u32, mu: f64, q: f64) -> Result<Self> {
        Self::with_configs(n, mu, q, QuadratureConfig::default(), QuadratureConfig::default())
    }

    pub fn with_configs(
        n: u32,
        mu: f64,
        q: f64,
        eta_quadrature: QuadratureConfig,
        theta_quadrature: QuadratureConfig,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(
                "TestFunctionSpec",
                format!("n = {n} must be >= 2"),
            ));
        }
        if !(mu >= 0.0) {
            return Err(Error::domain(
                "TestFunctionSpec",
                format!("mu = {mu} must be >= 0"),
            ));
        }
        let min_bound = -mu.min(1.0);
        let half_bound = -mu / 2.0;
        if !(q > min_bound) || !(q > half_bound) {
            return Err(Error::InadmissibleQ {
                q,
                min_bound,
                half_bound,
            });
        }
        eta_quadrature.validate()?;
        theta_quadrature.validate()?;
        Ok(TestFunctionSpec {
            n,
            mu,
            q,
            eta_quadrature,
            theta_quadrature,
        })
    }

    /// The order used throughout the blow-up argument:
    /// q = (n - mu - 1)/2 - 1/p at p = p_S(n + mu).
    pub fn critical(n: u32, mu: f64) -> Result<Self> {
        let p = exponents::strauss_exponent(n as f64 + mu)?;
        Self::new(n, mu, exponents::critical_q_value(n as f64, mu, p))
    }

    /// Same constants with a different order parameter.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        Self::with_configs(self.n, self.mu, q, self.eta_quadrature, self.theta_quadrature)
    }
}

/// Surface measure of the unit sphere S^{n-1}.
pub fn sphere_area(n: u32) -> f64 {
    let n = n as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / gamma_fn(n / 2.0).expect("n/2 > 0")
}

/// The plane-wave weight constant omega_{n-1} = |S^{n-2}| normalising
/// phi_eta(eta, 0, n) = |S^{n-1}|.
fn equator_weight(n: u32) -> f64 {
    let m = (n as f64 - 1.0) / 2.0;
    2.0 * std::f64::consts::PI.powf(m) / gamma_fn(m).expect("(n-1)/2 > 0")
}

/// e^{-x} * int_{-1}^{1} (1-theta^2)^{(n-3)/2} e^{x theta} d theta via the
/// substitution theta = sin(psi), which removes the n = 2 endpoint
/// singularity and keeps the integrand in [0, 1].
fn phi_hat(x: f64, n: u32, cfg: &QuadratureConfig) -> Result<f64> {
    let pow = n as f64 - 2.0;
    let half_pi = std::f64::consts::FRAC_PI_2;
    let est = adaptive_simpson(
        |psi: f64| psi.cos().powf(pow) * (x * (psi.sin() - 1.0)).exp(),
        -half_pi,
        half_pi,
        cfg,
        "phi_eta",
    )?;
    Ok(est.value)
}

/// Spherical plane-wave average phi_eta(x) at radius r = |x|.
pub fn phi_eta(eta: f64, r: f64, n: u32, cfg: &QuadratureConfig) -> Result<f64> {
    if !(eta > 0.0) || !(r >= 0.0) || n < 2 {
        return Err(Error::domain(
            "phi_eta",
            format!("need eta > 0, r >= 0, n >= 2; got eta = {eta}, r = {r}, n = {n}"),
        ));
    }
    Ok(equator_weight(n) * (eta * r).exp() * phi_hat(eta * r, n, cfg)?)
}

/// Time factor lambda_eta(t) = (eta(t+1))^{(mu+1)/2} K_{(mu-1)/2}(eta(t+1)).
/// Defined wherever t + 1 > 0 so difference stencils can straddle t = 0.
pub fn lambda_eta(eta: f64, t: f64, mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(eta > 0.0) || !(t > -1.0) {
        return Err(Error::domain(
            "lambda_eta",
            format!("need eta > 0 and t > -1; got eta = {eta}, t = {t}"),
        ));
    }
    let s = eta * (t + 1.0);
    let (hat, _) = bessel_k_scaled((mu - 1.0) / 2.0, s, cfg)?;
    Ok(s.powf((mu + 1.0) / 2.0) * (-s).exp() * hat)
}

/// d lambda_eta / dt in the closed recurrence form
/// mu/(1+t) lambda - eta (eta(t+1))^{(mu+1)/2} K_{(mu+1)/2}(eta(t+1)).
pub fn lambda_eta_dt(eta: f64, t: f64, mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let s = eta * (t + 1.0);
    let lam = lambda_eta(eta, t, mu, cfg)?;
    let (hat_up, _) = bessel_k_scaled((mu + 1.0) / 2.0, s, cfg)?;
    Ok(mu / (1.0 + t) * lam - eta * s.powf((mu + 1.0) / 2.0) * (-s).exp() * hat_up)
}

/// psi(x, t) = lambda_1(t) phi_1(x), the single-mode test function of the
/// a-priori lower bound.
pub fn psi(r: f64, t: f64, n: u32, mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(lambda_eta(1.0, t, mu, cfg)? * phi_eta(1.0, r, n, cfg)?)
}

/// Which line of the two-regime profile applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// -mu/2 < q < (n - mu - 1)/2.
    Flat,
    /// q > (n - mu - 1)/2.
    BoundaryLayer,
}

/// Profile regime plus the exponents of (t+1), (t+1+|x|), (t+1-|x|).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRegime {
    pub regime: Regime,
    pub exponents: (f64, f64, f64),
}

/// Classify the large-time profile of b_q. Fails exactly on the regime
/// boundary q = (n - mu - 1)/2, which the profile statement excludes.
pub fn classify_regime(spec: &TestFunctionSpec) -> Result<ProfileRegime> {
    let edge = (spec.n as f64 - spec.mu - 1.0) / 2.0;
    if spec.q == edge {
        return Err(Error::domain(
            "classify_regime",
            format!("q = {} sits on the regime boundary (n-mu-1)/2", spec.q),
        ));
    }
    Ok(if spec.q < edge {
        ProfileRegime {
            regime: Regime::Flat,
            exponents: (spec.mu / 2.0, -spec.q - spec.mu / 2.0, 0.0),
        }
    } else {
        ProfileRegime {
            regime: Regime::BoundaryLayer,
            exponents: (
                spec.mu / 2.0,
                (1.0 - spec.n as f64) / 2.0,
                edge - spec.q,
            ),
        }
    })
}

/// Large-time profile of b_q up to constants:
/// flat regime (t+1)^{mu/2} (t+1+r)^{-q-mu/2}; boundary-layer regime
/// (t+1)^{mu/2} (t+1+r)^{(1-n)/2} (t+1-r)^{(n-mu-1)/2-q}.
pub fn asymptotic_profile(spec: &TestFunctionSpec, r: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) || !(r >= 0.0) || r > t + 0.5 {
        return Err(Error::domain(
            "asymptotic_profile",
            format!("need t > 0 and 0 <= r <= t + 1/2; got r = {r}, t = {t}"),
        ));
    }
    let regime = classify_regime(spec)?;
    let (a, b, c) = regime.exponents;
    Ok((t + 1.0).powf(a) * (t + 1.0 + r).powf(b) * (t + 1.0 - r).powf(c))
}

/// Fixed eta-quadrature rule in v = -ln(eta): Gauss-Legendre panels of unit
/// length over [0, V], with V chosen from the integrand's decay rate so the
/// neglected tail is below tolerance for every t up to the build hint.
///
/// Rules are deterministic given (q, rate, t_hint, tolerances); sharing one
/// rule across evaluations at nearby times makes quadrature error cancel in
/// finite differences.
#[derive(Debug, Clone)]
pub struct EtaRule {
    /// (eta, weight) pairs; weights absorb the Jacobian and eta^q.
    pairs: Vec<(f64, f64)>,
}

impl EtaRule {
    pub fn build(q: f64, decay_rate: f64, t_hint: f64, cfg: &QuadratureConfig) -> Self {
        assert!(decay_rate > 0.0, "eta integrand must decay");
        let budget = -cfg.rel_tol.ln() + 12.0;
        // solve rate*w - ln(1+w) = budget by two fixed-point sweeps
        let mut w = budget / decay_rate;
        for _ in 0..3 {
            w = (budget + (1.0 + w).ln()) / decay_rate;
        }
        let v_max = (1.0 + t_hint.max(0.0)).ln() + w + 2.0;
        let panels = v_max.ceil() as usize;
        let edges: Vec<f64> = (0..=panels)
            .map(|i| v_max * i as f64 / panels as f64)
            .collect();
        let rule = PanelRule::composite(&edges, 12);
        let pairs = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&v, &wt)| ((-v).exp(), wt * (-q * v).exp()))
            .collect();
        EtaRule { pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The (eta, weight) pairs of the rule.
    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }
}

/// Point evaluator for b_q or its tilde companion over a shared eta rule.
///
/// Cost of one evaluation is O(nodes_eta x nodes_theta); the Bessel factor
/// per node costs one more inner quadrature.
#[derive(Debug, Clone)]
pub struct BqEvaluator {
    spec: TestFunctionSpec,
    /// Bessel order of the time factor: (mu-1)/2 for b_q, (mu+1)/2 for the
    /// tilde variant.
    order: f64,
    rule: EtaRule,
    inner: QuadratureConfig,
}

impl BqEvaluator {
    /// Evaluator for b_q, valid for times up to `t_hint`.
    pub fn for_b_q(spec: &TestFunctionSpec, t_hint: f64) -> Result<Self> {
        let rate = spec.q + spec.mu.min(1.0);
        debug_assert!(rate > 0.0); // guaranteed by the spec restriction
        Ok(BqEvaluator {
            order: (spec.mu - 1.0) / 2.0,
            rule: EtaRule::build(spec.q, rate, t_hint, &spec.eta_quadrature),
            inner: Self::inner_config(&spec.eta_quadrature),
            spec: spec.clone(),
        })
    }

    /// Evaluator for the tilde variant, whose Bessel factor of order
    /// (mu+1)/2 cancels the small-eta power gain entirely: the integrand
    /// behaves like eta^{q-1}, so q > 0 is required for integrability.
    pub fn for_b_q_tilde(spec: &TestFunctionSpec, t_hint: f64) -> Result<Self> {
        if !(spec.q > 0.0) {
            return Err(Error::domain(
                "b_q_tilde",
                format!(
                    "tilde variant needs q > 0 (integrand ~ eta^(q-1) near 0), got q = {}",
                    spec.q
                ),
            ));
        }
        Ok(BqEvaluator {
            order: (spec.mu + 1.0) / 2.0,
            rule: EtaRule::build(spec.q, spec.q, t_hint, &spec.eta_quadrature),
            inner: Self::inner_config(&spec.eta_quadrature),
            spec: spec.clone(),
        })
    }

    fn inner_config(outer: &QuadratureConfig) -> QuadratureConfig {
        QuadratureConfig {
            rel_tol: (outer.rel_tol * 1e-2).max(5e-14),
            abs_tol: 1e-15,
            ..*outer
        }
    }

    pub fn spec(&self) -> &TestFunctionSpec {
        &self.spec
    }

    /// Evaluate at radius r >= 0 and time t >= 0.
    pub fn eval(&self, r: f64, t: f64) -> Result<f64> {
        if !(r >= 0.0) || !(t >= 0.0) {
            return Err(Error::domain(
                "b_q",
                format!("need r >= 0 and t >= 0; got r = {r}, t = {t}"),
            ));
        }
        let omega = equator_weight(self.spec.n);
        let half = (self.spec.mu + 1.0) / 2.0;
        let mut acc = 0.0;
        for &(eta, w) in &self.rule.pairs {
            let s = eta * (t + 1.0);
            let (k_hat, _) = bessel_k_scaled(self.order, s, &self.inner)?;
            let p_hat = phi_hat(eta * r, self.spec.n, &self.spec.theta_quadrature)?;
            // lambda * phi = s^{(mu+1)/2} k_hat e^{-s} * omega p_hat e^{eta r}
            acc += w * s.powf(half) * k_hat * omega * p_hat * (-eta * (t + 1.0 - r)).exp();
        }
        Ok(acc)
    }
}

/// b_q(x, t) at radius r = |x|. Builds a fresh eta rule per call; use
/// [`BqEvaluator`] directly when evaluating many nearby points.
pub fn b_q(spec: &TestFunctionSpec, r: f64, t: f64) -> Result<f64> {
    BqEvaluator::for_b_q(spec, t)?.eval(r, t)
}

/// The companion integral with Bessel order (mu+1)/2 in place of (mu-1)/2;
/// the time derivative identity reads b_q' = mu/(1+t) b_q - b~_{q+1}.
pub fn b_q_tilde(spec: &TestFunctionSpec, r: f64, t: f64) -> Result<f64> {
    BqEvaluator::for_b_q_tilde(spec, t)?.eval(r, t)
}

/// Result of scanning for the onset time of the asymptotic profile.
#[derive(Debug, Clone)]
pub struct OnsetScan {
    /// Smallest scanned time from which the b_q/profile ratio varies by
    /// less than 20 percent, if any.
    pub t0: Option<f64>,
    /// Rows (t, r, b_q, profile, ratio).
    pub samples: Vec<(f64, f64, f64, f64, f64)>,
}

/// Scan b_q/profile along r = r_frac * t over the given times and estimate
/// the onset time of profile equivalence. The 20 percent variation window
/// operationalises the unquantified "for t > T0" of the profile statement.
pub fn estimate_onset_time(
    spec: &TestFunctionSpec,
    times: &[f64],
    r_frac: f64,
) -> Result<OnsetScan> {
    if times.is_empty() {
        return Err(Error::InsufficientData("no scan times given".into()));
    }
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let eval = BqEvaluator::for_b_q(spec, t_max)?;
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let r = r_frac * t;
        let b = eval.eval(r, t)?;
        let prof = asymptotic_profile(spec, r, t)?;
        samples.push((t, r, b, prof, b / prof));
    }
    let mut t0 = None;
    for i in 0..samples.len() {
        let tail = &samples[i..];
        let max = tail.iter().map(|s| s.4).fold(f64::MIN, f64::max);
        let min = tail.iter().map(|s| s.4).fold(f64::MAX, f64::min);
        if min > 0.0 && max / min < 1.2 {
            t0 = Some(samples[i].0);
            break;
        }
    }
    Ok(OnsetScan { t0, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    /// Critical spec for (n, mu): q = (n - mu - 1)/2 - 1/p_S(n + mu).
    fn critical_spec(n: u32, mu: f64) -> TestFunctionSpec {
        TestFunctionSpec::critical(n, mu).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(TestFunctionSpec::new(1, 1.0, 0.5).is_err());
        assert!(TestFunctionSpec::new(2, 1.0, -1.0).is_err()); // q = -min(mu,1)
        assert!(TestFunctionSpec::new(2, 0.5, -0.3).is_err()); // q <= -mu/2
        assert!(TestFunctionSpec::new(2, 1.0, -0.4).is_ok());
    }

    #[test]
    fn phi_at_origin_is_sphere_area() {
        for n in [2u32, 3, 4, 5] {
            let got = phi_eta(0.7, 0.0, n, &cfg()).unwrap();
            assert_relative_eq!(got, sphere_area(n), max_relative = 1e-9);
        }
        assert_relative_eq!(
            phi_eta(1.0, 0.0, 2, &cfg()).unwrap(),
            2.0 * std::f64::consts::PI,
            max_relative = 1e-10
        );
    }

    #[test]
    fn phi_closed_form_three_dimensions() {
        // phi_eta(r) = 4 pi sinh(eta r)/(eta r) for n = 3
        for (eta, r) in [(0.5, 1.0), (1.0, 3.0), (0.2, 0.01)] {
            let got = phi_eta(eta, r, 3, &cfg()).unwrap();
            let x: f64 = eta * r;
            let want = 4.0 * std::f64::consts::PI * x.sinh() / x;
            assert_relative_eq!(got, want, max_relative = 1e-9);
        }
    }

    #[test]
    fn phi_satisfies_helmholtz() {
        // phi'' + (n-1)/r phi' = eta^2 phi by fourth-order differences
        for n in [2u32, 3, 4] {
            for (eta, r) in [(0.5, 0.8), (1.0, 2.0)] {
                let h = 1e-3 * (1.0 + r);
                let f = |rr: f64| phi_eta(eta, rr, n, &cfg()).unwrap();
                let d2 = (-f(r + 2.0 * h) + 16.0 * f(r + h) - 30.0 * f(r)
                    + 16.0 * f(r - h)
                    - f(r - 2.0 * h))
                    / (12.0 * h * h);
                let d1 = (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h))
                    / (12.0 * h);
                let lap = d2 + (n as f64 - 1.0) / r * d1;
                let rhs = eta * eta * f(r);
                assert!(
                    ((lap - rhs) / rhs).abs() < 1e-6,
                    "n={n}, eta={eta}, r={r}: {} vs {}",
                    lap,
                    rhs
                );
            }
        }
    }

    #[test]
    fn lambda_zero_damping_closed_form() {
        // mu = 0: lambda = sqrt(pi/2) e^{-eta(t+1)} via K_{-1/2} = K_{1/2}
        for (eta, t) in [(0.3, 0.0), (1.0, 2.0), (0.05, 10.0)] {
            let got = lambda_eta(eta, t, 0.0, &cfg()).unwrap();
            let want = (std::f64::consts::PI / 2.0).sqrt() * (-eta * (t + 1.0)).exp();
            assert_relative_eq!(got, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn lambda_satisfies_conjugate_ode() {
        // [(1+t)^2 d2 - mu (1+t) d + (mu - eta^2 (1+t)^2)] lambda = 0
        let tight = QuadratureConfig {
            rel_tol: 1e-12,
            ..cfg()
        };
        for mu in [0.5, 1.0, 1.5] {
            for eta in [0.1, 0.5, 1.0] {
                for t in [0.0, 1.0, 5.0] {
                    let h = 0.01 * (1.0 + t);
                    let f = |tt: f64| lambda_eta(eta, tt, mu, &tight).unwrap();
                    let d2 = (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t)
                        + 16.0 * f(t - h)
                        - f(t - 2.0 * h))
                        / (12.0 * h * h);
                    let d1 = (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h)
                        + f(t - 2.0 * h))
                        / (12.0 * h);
                    let s = 1.0 + t;
                    let lam = f(t);
                    let residual = s * s * d2 - mu * s * d1 + (mu - eta * eta * s * s) * lam;
                    let scale =
                        (s * s * d2).abs() + (mu * s * d1).abs() + ((mu - eta * eta * s * s) * lam).abs();
                    assert!(
                        residual.abs() / scale < 1e-6,
                        "mu={mu}, eta={eta}, t={t}: rel {}",
                        residual.abs() / scale
                    );
                }
            }
        }
    }

    #[test]
    fn lambda_derivative_identity_matches_differences() {
        let tight = QuadratureConfig {
            rel_tol: 1e-12,
            ..cfg()
        };
        for (eta, t, mu) in [(0.4, 1.0, 1.0), (1.0, 3.0, 0.5), (0.1, 0.5, 1.5)] {
            let closed = lambda_eta_dt(eta, t, mu, &tight).unwrap();
            let h = 1e-3 * (1.0 + t);
            let f = |tt: f64| lambda_eta(eta, tt, mu, &tight).unwrap();
            let fd = (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h))
                / (12.0 * h);
            assert_relative_eq!(closed, fd, max_relative = 1e-7);
        }
    }

    /// Adaptive-quadrature reference for b_q, independent of the panel rule.
    fn b_q_adaptive_oracle(spec: &TestFunctionSpec, r: f64, t: f64) -> f64 {
        let rate = spec.q + spec.mu.min(1.0);
        let v_max = (1.0 + t).ln() + 40.0 / rate;
        let tight = QuadratureConfig {
            rel_tol: 1e-11,
            ..cfg()
        };
        adaptive_simpson(
            |v: f64| {
                let eta = (-v).exp();
                lambda_eta(eta, t, spec.mu, &tight).unwrap()
                    * phi_eta(eta, r, spec.n, &tight).unwrap()
                    * (-spec.q * v).exp()
            },
            0.0,
            v_max,
            &tight,
            "b_q oracle",
        )
        .unwrap()
        .value
    }

    #[test]
    fn b_q_matches_adaptive_oracle() {
        let spec = critical_spec(2, 1.0);
        for (r, t) in [(0.0, 1.0), (0.5, 5.0), (2.0, 8.0)] {
            let got = b_q(&spec, r, t).unwrap();
            let want = b_q_adaptive_oracle(&spec, r, t);
            assert_relative_eq!(got, want, max_relative = 1e-8);
        }
    }

    #[test]
    fn b_q_conjugate_time_identity() {
        // (d2/dt2 - mu/(1+t) d/dt + mu/(1+t)^2) b_q = b_{q+2}
        let spec = critical_spec(2, 1.0);
        let up = spec.with_q(spec.q + 2.0).unwrap();
        for (r, t) in [(0.0, 1.0), (0.5, 5.0), (1.0, 20.0)] {
            let eval = BqEvaluator::for_b_q(&spec, t + 1.0).unwrap();
            let h = 1e-3 * (1.0 + t);
            let f = |tt: f64| eval.eval(r, tt).unwrap();
            let d2 = (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h)
                - f(t - 2.0 * h))
                / (12.0 * h * h);
            let d1 = (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h))
                / (12.0 * h);
            let lhs = d2 - spec.mu / (1.0 + t) * d1 + spec.mu / (1.0 + t).powi(2) * f(t);
            let rhs = b_q(&up, r, t).unwrap();
            assert!(
                ((lhs - rhs) / rhs).abs() < 1e-5,
                "r={r}, t={t}: lhs {lhs} vs rhs {rhs}"
            );
        }
    }

    #[test]
    fn b_q_spatial_identity() {
        // Delta b_q = b_{q+2}, radial Laplacian with origin regularisation
        let spec = critical_spec(2, 1.0);
        let up = spec.with_q(spec.q + 2.0).unwrap();
        let nf = spec.n as f64;
        for (r, t) in [(0.0, 1.0), (0.5, 5.0), (1.0, 20.0)] {
            let eval = BqEvaluator::for_b_q(&spec, t).unwrap();
            let h = 1e-3 * (1.0 + r);
            let f = |rr: f64| eval.eval(rr, t).unwrap();
            let lhs = if r == 0.0 {
                // even extension: b(-h) = b(h)
                nf * (-2.0 * f(2.0 * h) + 32.0 * f(h) - 30.0 * f(0.0)) / (12.0 * h * h)
            } else {
                let d2 = (-f(r + 2.0 * h) + 16.0 * f(r + h) - 30.0 * f(r) + 16.0 * f(r - h)
                    - f(r - 2.0 * h))
                    / (12.0 * h * h);
                let d1 = (-f(r + 2.0 * h) + 8.0 * f(r + h) - 8.0 * f(r - h) + f(r - 2.0 * h))
                    / (12.0 * h);
                d2 + (nf - 1.0) / r * d1
            };
            let rhs = b_q(&up, r, t).unwrap();
            assert!(
                ((lhs - rhs) / rhs).abs() < 1e-5,
                "r={r}, t={t}: lhs {lhs} vs rhs {rhs}"
            );
        }
    }

    #[test]
    fn b_q_time_derivative_identity() {
        // d/dt b_q = mu/(1+t) b_q - b~_{q+1}
        let spec = critical_spec(2, 1.0);
        let up = spec.with_q(spec.q + 1.0).unwrap();
        for (r, t) in [(0.0, 1.0), (0.5, 5.0), (1.0, 20.0)] {
            let eval = BqEvaluator::for_b_q(&spec, t + 1.0).unwrap();
            let h = 1e-3 * (1.0 + t);
            let f = |tt: f64| eval.eval(r, tt).unwrap();
            let d1 = (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h))
                / (12.0 * h);
            let rhs = spec.mu / (1.0 + t) * f(t) - b_q_tilde(&up, r, t).unwrap();
            assert!(
                ((d1 - rhs) / rhs).abs() < 1e-6,
                "r={r}, t={t}: fd {d1} vs identity {rhs}"
            );
        }
    }

    #[test]
    fn b_q_monotone_in_order_and_radius() {
        let spec = critical_spec(2, 1.0);
        // decreasing in q at fixed (r, t)
        let mut prev = f64::INFINITY;
        for dq in [0.0, 0.5, 1.0, 2.0] {
            let s = spec.with_q(spec.q + dq).unwrap();
            let v = b_q(&s, 0.5, 2.0).unwrap();
            assert!(v < prev, "q + {dq}: {v} not below {prev}");
            prev = v;
        }
        // nondecreasing in r at fixed t
        let mut prev = 0.0;
        for r in [0.0, 0.5, 1.0, 2.0] {
            let v = b_q(&spec, r, 2.0).unwrap();
            assert!(v >= prev, "r = {r}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn tilde_requires_positive_order() {
        let spec = critical_spec(2, 1.0); // q ~ -0.414 < 0
        assert!(b_q_tilde(&spec, 0.5, 1.0).is_err());
        let ok = spec.with_q(spec.q + 1.0).unwrap();
        assert!(b_q_tilde(&ok, 0.5, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn tilde_positive_everywhere_sampled() {
        let spec = critical_spec(2, 1.0).with_q(0.6).unwrap();
        for (r, t) in [(0.0, 0.0), (1.0, 2.0), (5.0, 10.0)] {
            assert!(b_q_tilde(&spec, r, t).unwrap() > 0.0);
        }
    }

    #[test]
    fn flat_regime_slope_at_origin() {
        // b_q(0, t) ~ (t+1)^{-q}: log-log slope within 5% of -q
        let spec = critical_spec(2, 1.0);
        let eval = BqEvaluator::for_b_q(&spec, 400.0).unwrap();
        let ts = [50.0f64, 100.0, 200.0, 400.0];
        let xs: Vec<f64> = ts.iter().map(|t| (t + 1.0).ln()).collect();
        let ys: Vec<f64> = ts
            .iter()
            .map(|&t| eval.eval(0.0, t).unwrap().ln())
            .collect();
        let slope = {
            let n = xs.len() as f64;
            let sx: f64 = xs.iter().sum();
            let sy: f64 = ys.iter().sum();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            (n * sxy - sx * sy) / (n * sxx - sx * sx)
        };
        assert!(
            (slope + spec.q).abs() < 0.05 * spec.q.abs(),
            "slope {slope} vs -q = {}",
            -spec.q
        );
    }

    #[test]
    fn profile_ratio_bounded_along_rays() {
        let spec = critical_spec(2, 1.0);
        let eval = BqEvaluator::for_b_q(&spec, 200.0).unwrap();
        let mut ratios = Vec::new();
        for frac in [0.0, 0.3, 0.6, 0.9] {
            for t in [50.0, 100.0, 200.0] {
                let r = frac * t;
                let ratio = eval.eval(r, t).unwrap() / asymptotic_profile(&spec, r, t).unwrap();
                assert!(ratio.is_finite() && ratio > 0.0);
                ratios.push(ratio);
            }
        }
        let max = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let min = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min < 25.0, "ratio spread {}", max / min);
    }

    #[test]
    fn tilde_to_base_ratio_slope_along_ray() {
        // b~_{q+1}/b_q ~ (1+t)^{q+(mu-n+1)/2} (t+1-r)^{-q-1+(n-mu-1)/2};
        // along r = 0.8 t both powers combine to slope -1 in t.
        let spec = critical_spec(2, 1.0);
        let up = spec.with_q(spec.q + 1.0).unwrap();
        let base = BqEvaluator::for_b_q(&spec, 200.0).unwrap();
        let tilde = BqEvaluator::for_b_q_tilde(&up, 200.0).unwrap();
        let ts = [50.0, 100.0, 200.0];
        let logs: Vec<f64> = ts
            .iter()
            .map(|&t| {
                let r = 0.8 * t;
                (tilde.eval(r, t).unwrap() / base.eval(r, t).unwrap()).ln()
            })
            .collect();
        let slope = (logs[2] - logs[0]) / (ts[2] / ts[0]).ln();
        assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn hypergeometric_profile_cross_check() {
        // b_q ~ (t+1)^{mu/2}(t+1+r)^{-q-mu/2} F(q+mu/2, (n-1)/2, n-1; 2r/(t+1+r)):
        // the ratio should be stable along r = 0.8 t.
        use crate::special::gauss_2f1;
        let spec = critical_spec(2, 1.0);
        let eval = BqEvaluator::for_b_q(&spec, 200.0).unwrap();
        let nf = spec.n as f64;
        let mut ratios = Vec::new();
        for t in [50.0, 100.0, 200.0] {
            let r = 0.8 * t;
            let z = 2.0 * r / (t + 1.0 + r);
            let f = gauss_2f1(spec.q + spec.mu / 2.0, (nf - 1.0) / 2.0, nf - 1.0, z, &cfg())
                .unwrap()
                .value;
            let profile =
                (t + 1.0).powf(spec.mu / 2.0) * (t + 1.0 + r).powf(-spec.q - spec.mu / 2.0) * f;
            ratios.push(eval.eval(r, t).unwrap() / profile);
        }
        let mid = ratios[1];
        for r in &ratios {
            assert!(
                (r / mid - 1.0).abs() < 0.15,
                "ratios not stable: {ratios:?}"
            );
        }
    }

    #[test]
    fn psi_positivity_and_separability() {
        let c = cfg();
        for (r, t) in [(0.0, 0.0), (0.5, 1.0), (2.0, 5.0)] {
            assert!(psi(r, t, 2, 1.0, &c).unwrap() > 0.0);
        }
        // psi(r, t)/psi(0, t) is independent of t
        let ratio_at = |t: f64| {
            psi(1.5, t, 3, 0.5, &c).unwrap() / psi(0.0, t, 3, 0.5, &c).unwrap()
        };
        assert_relative_eq!(ratio_at(0.0), ratio_at(3.0), max_relative = 1e-8);
        assert_relative_eq!(ratio_at(1.0), ratio_at(7.0), max_relative = 1e-8);
    }

    #[test]
    fn psi_solves_conjugate_equation() {
        // psi_tt - Delta psi - d/dt (mu/(1+t) psi) = 0 at eta = 1
        let tight = QuadratureConfig {
            rel_tol: 1e-12,
            ..cfg()
        };
        let (n, mu) = (3u32, 1.0);
        for (r, t) in [(0.5, 1.0), (1.0, 2.0)] {
            let h = 1e-3 * (1.0 + t);
            let f = |rr: f64, tt: f64| psi(rr, tt, n, mu, &tight).unwrap();
            let d2t = (-f(r, t + 2.0 * h) + 16.0 * f(r, t + h) - 30.0 * f(r, t)
                + 16.0 * f(r, t - h)
                - f(r, t - 2.0 * h))
                / (12.0 * h * h);
            let hr = 1e-3 * (1.0 + r);
            let d2r = (-f(r + 2.0 * hr, t) + 16.0 * f(r + hr, t) - 30.0 * f(r, t)
                + 16.0 * f(r - hr, t)
                - f(r - 2.0 * hr, t))
                / (12.0 * hr * hr);
            let d1r = (-f(r + 2.0 * hr, t) + 8.0 * f(r + hr, t) - 8.0 * f(r - hr, t)
                + f(r - 2.0 * hr, t))
                / (12.0 * hr);
            let lap = d2r + (n as f64 - 1.0) / r * d1r;
            // d/dt [mu/(1+t) psi] by fourth-order differences
            let g = |tt: f64| mu / (1.0 + tt) * f(r, tt);
            let dg = (-g(t + 2.0 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2.0 * h))
                / (12.0 * h);
            let residual = d2t - lap - dg;
            let scale = d2t.abs() + lap.abs() + dg.abs();
            assert!(
                residual.abs() / scale < 1e-6,
                "r={r}, t={t}: rel {}",
                residual.abs() / scale
            );
        }
    }

    #[test]
    fn regime_classification_matches_sign() {
        for (n, mu, q, expect) in [
            (2u32, 1.0, -0.4, Regime::Flat),        // edge = 0
            (3, 1.0, 0.3, Regime::Flat),            // edge = 0.5
            (3, 1.0, 0.8, Regime::BoundaryLayer),   // above edge
            (4, 0.5, 1.3, Regime::BoundaryLayer),   // edge = 1.25
        ] {
            let spec = TestFunctionSpec::new(n, mu, q).unwrap();
            assert_eq!(classify_regime(&spec).unwrap().regime, expect);
        }
        // exactly on the boundary: refused
        let spec = TestFunctionSpec::new(3, 1.0, 0.5).unwrap();
        assert!(classify_regime(&spec).is_err());
    }

    #[test]
    fn profile_domain_checks() {
        let spec = critical_spec(2, 1.0);
        assert!(asymptotic_profile(&spec, 0.0, 0.0).is_err()); // t > 0 required
        assert!(asymptotic_profile(&spec, 3.0, 2.0).is_err()); // r > t + 1/2
        assert!(asymptotic_profile(&spec, 1.0, 2.0).is_ok());
    }

    /// Lower incomplete gamma by power-aware quadrature (test oracle).
    fn incomplete_gamma_lower(a: f64, x: f64) -> f64 {
        // zeta = s^{1/a} flattens the endpoint power
        let upper = x.powf(a);
        adaptive_simpson(
            |s: f64| (-s.powf(1.0 / a)).exp() / a,
            0.0,
            upper,
            &cfg(),
            "inc gamma",
        )
        .unwrap()
        .value
    }

    #[test]
    fn endpoint_constants_bracket() {
        // c0 = int_0^{1/2} <= int_0^{Lambda} <= Gamma(q + mu/2) for Lambda >= 1/2
        let spec = critical_spec(2, 1.0);
        let a = spec.q + spec.mu / 2.0;
        assert!(a > 0.0);
        let c0 = incomplete_gamma_lower(a, 0.5);
        let upper = gamma_fn(a).unwrap();
        assert!(c0 > 0.0);
        for lambda in [0.5, 1.0, 3.0, 10.0] {
            let v = incomplete_gamma_lower(a, lambda);
            assert!(v >= c0 * (1.0 - 1e-9) && v <= upper * (1.0 + 1e-9));
        }
    }

    #[test]
    fn onset_scan_reports_t0() {
        let spec = critical_spec(2, 1.0);
        let times = [20.0, 50.0, 100.0, 200.0, 400.0];
        let scan = estimate_onset_time(&spec, &times, 0.0).unwrap();
        assert_eq!(scan.samples.len(), times.len());
        assert!(scan.t0.is_some(), "ratio never settled: {:?}", scan.samples);
    }
}
