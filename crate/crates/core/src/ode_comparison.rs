//! Ordinary-differential machinery of the blow-up argument: the comparison
//! lemma for a(t) K'' + K' >= b(t) K^{1+alpha}, the variable changes
//! t + 1 = e^tau and s = eps^{p(p-1)} tau, the Riccati equation
//! H3' = delta H3^{(p+1)/2} with its closed-form blow-up time, the
//! subsolution H2 = s H3, and the lifespan bound exp(C eps^{-p(p-1)}).

use std::sync::Arc;

use crate::error::{Error, Result};

/// Magnitude past which a trajectory counts as blown up.
pub const BLOWUP_THRESHOLD: f64 = 1e10;

/// Coefficient function used in comparison problems.
pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A pair of second-order problems a(t) y'' + y' = b(t) y^{1+alpha} with
/// ordered initial data, integrated side by side to watch the ordering.
#[derive(Clone)]
pub struct ComparisonProblem {
    pub coeff_a: Coefficient,
    pub coeff_b: Coefficient,
    pub alpha: f64,
    /// (K(0), K'(0)) for the upper member.
    pub k_init: (f64, f64),
    /// (h(0), h'(0)) for the lower member.
    pub h_init: (f64, f64),
}

impl std::fmt::Debug for ComparisonProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ComparisonProblem")
            .field("alpha", &self.alpha)
            .field("k_init", &self.k_init)
            .field("h_init", &self.h_init)
            .finish()
    }
}

impl ComparisonProblem {
    pub fn constant_coefficients(
        a: f64,
        b: f64,
        alpha: f64,
        k_init: (f64, f64),
        h_init: (f64, f64),
    ) -> Self {
        ComparisonProblem {
            coeff_a: Arc::new(move |_| a),
            coeff_b: Arc::new(move |_| b),
            alpha,
            k_init,
            h_init,
        }
    }
}

/// Outcome of a side-by-side integration.
#[derive(Debug, Clone)]
pub struct ComparisonVerdict {
    /// K > h and K' > h' held at every grid point reached.
    pub ordering_held: bool,
    /// First time the ordering failed, if it did.
    pub first_violation: Option<f64>,
    /// Blow-up time of the upper member, if reached.
    pub k_blowup: Option<f64>,
    /// Blow-up time of the lower member, if reached.
    pub h_blowup: Option<f64>,
    /// Final integration time.
    pub t_reached: f64,
    /// Sampled (t, K, K', h, h') rows for inspection.
    pub trace: Vec<(f64, f64, f64, f64, f64)>,
}

fn signed_power(y: f64, expo: f64) -> f64 {
    y.signum() * y.abs().powf(expo)
}

struct Member {
    u: f64,
    v: f64,
    blown: Option<f64>,
}

impl Member {
    /// One RK4 step of a(t) u'' + u' = b(t) u^{1+alpha}; returns false when
    /// the step could not be completed even after halving to the floor,
    /// which is the step-control blow-up certificate.
    fn step(
        &mut self,
        t: f64,
        mut dt: f64,
        a: &Coefficient,
        b: &Coefficient,
        alpha: f64,
    ) -> bool {
        let rhs = |t: f64, u: f64, v: f64| {
            let av = a(t);
            (b(t) * signed_power(u, 1.0 + alpha) - v) / av
        };
        let floor = 1e-14 * (1.0 + t.abs());
        loop {
            let (u0, v0) = (self.u, self.v);
            let k1u = v0;
            let k1v = rhs(t, u0, v0);
            let k2u = v0 + 0.5 * dt * k1v;
            let k2v = rhs(t + 0.5 * dt, u0 + 0.5 * dt * k1u, v0 + 0.5 * dt * k1v);
            let k3u = v0 + 0.5 * dt * k2v;
            let k3v = rhs(t + 0.5 * dt, u0 + 0.5 * dt * k2u, v0 + 0.5 * dt * k2v);
            let k4u = v0 + dt * k3v;
            let k4v = rhs(t + dt, u0 + dt * k3u, v0 + dt * k3v);
            let u1 = u0 + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            let v1 = v0 + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            let wild = !u1.is_finite() || !v1.is_finite() || u1.abs() > 10.0 * (u0.abs() + 1.0);
            if wild && dt > floor {
                dt *= 0.5;
                continue;
            }
            if wild {
                return false;
            }
            self.u = u1;
            self.v = v1;
            return true;
        }
    }
}

/// Integrate both members of a comparison problem and watch the ordering
/// K > h, K' > h'. Blow-up of a member (state beyond [`BLOWUP_THRESHOLD`]
/// or step-control floor reached) freezes it at its last state.
pub fn comparison_integrate(
    prob: &ComparisonProblem,
    t_end: f64,
    step: f64,
) -> Result<ComparisonVerdict> {
    if !(prob.alpha >= 0.0) {
        return Err(Error::InvalidComparison(format!(
            "alpha = {} must be >= 0",
            prob.alpha
        )));
    }
    if !(prob.k_init.0 > prob.h_init.0) || !(prob.k_init.1 >= prob.h_init.1) {
        return Err(Error::InvalidComparison(format!(
            "need K(0) > h(0) and K'(0) >= h'(0); got K(0) = {}, h(0) = {}, K'(0) = {}, h'(0) = {}",
            prob.k_init.0, prob.h_init.0, prob.k_init.1, prob.h_init.1
        )));
    }
    if !(step > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidComparison(
            "step and t_end must be positive".into(),
        ));
    }

    let n_steps = (t_end / step).ceil() as usize;
    let sample_every = (n_steps / 1000).max(1);
    let mut k = Member {
        u: prob.k_init.0,
        v: prob.k_init.1,
        blown: None,
    };
    let mut h = Member {
        u: prob.h_init.0,
        v: prob.h_init.1,
        blown: None,
    };
    let mut verdict = ComparisonVerdict {
        ordering_held: true,
        first_violation: None,
        k_blowup: None,
        h_blowup: None,
        t_reached: 0.0,
        trace: vec![(0.0, k.u, k.v, h.u, h.v)],
    };

    let mut t = 0.0;
    for i in 0..n_steps {
        if (prob.coeff_a)(t) <= 0.0 || (prob.coeff_b)(t) <= 0.0 {
            return Err(Error::InvalidComparison(format!(
                "coefficients must stay positive; failed at t = {t}"
            )));
        }
        let dt = step.min(t_end - t);
        for (m, slot) in [(&mut k, &mut verdict.k_blowup), (&mut h, &mut verdict.h_blowup)] {
            if m.blown.is_none() {
                let ok = m.step(t, dt, &prob.coeff_a, &prob.coeff_b, prob.alpha);
                if !ok || m.u.abs() > BLOWUP_THRESHOLD {
                    m.blown = Some(t + 0.5 * dt);
                    *slot = m.blown;
                }
            }
        }
        t += dt;
        verdict.t_reached = t;

        // ordering is meaningful only while both members are alive
        if k.blown.is_none() && h.blown.is_none() && (k.u <= h.u || k.v <= h.v) {
            verdict.ordering_held = false;
            verdict.first_violation.get_or_insert(t);
        }
        if i % sample_every == 0 || i + 1 == n_steps {
            verdict.trace.push((t, k.u, k.v, h.u, h.v));
        }
        // once the lower member blew up the comparison statement is settled
        if h.blown.is_some() && k.blown.is_some() {
            break;
        }
        if h.blown.is_some() && k.blown.is_none() {
            // keep integrating K a little to observe its own blow-up, but
            // the ordering claim is already certified
            break;
        }
    }
    Ok(verdict)
}

/// Parameters of the Riccati barrier H3' = delta H3^{(p+1)/2},
/// H3(s0) = c0/4, plus the bookkeeping constant c0 of the lower bounds
/// H1(s) >= c0 s, H1'(s) >= c0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiSpec {
    pub delta: f64,
    pub s0: f64,
    pub c0: f64,
    pub p: f64,
}

impl RiccatiSpec {
    pub fn new(delta: f64, s0: f64, c0: f64, p: f64) -> Result<Self> {
        if !(delta > 0.0) || !(s0 > 0.0) || !(c0 > 0.0) {
            return Err(Error::domain(
                "RiccatiSpec",
                format!("delta, s0, c0 must be positive; got {delta}, {s0}, {c0}"),
            ));
        }
        if !(p > 1.0) {
            return Err(Error::domain("RiccatiSpec", format!("p = {p} must be > 1")));
        }
        Ok(RiccatiSpec { delta, s0, c0, p })
    }

    /// Initial value H3(s0) = c0/4.
    pub fn h3_init(&self) -> f64 {
        self.c0 / 4.0
    }

    /// The construction needs c0 << s0 << 1/delta; the working ratios are
    /// c0 <= s0/10 and s0 <= 1/(10 delta).
    pub fn ordering_ok(&self) -> bool {
        self.c0 <= self.s0 / 10.0 && self.s0 <= 1.0 / (10.0 * self.delta)
    }

    pub fn require_ordering(&self) -> Result<()> {
        if self.ordering_ok() {
            Ok(())
        } else {
            Err(Error::OrderingViolation(format!(
                "need c0 <= s0/10 and s0 <= 1/(10 delta); got c0 = {}, s0 = {}, 1/(10 delta) = {}",
                self.c0,
                self.s0,
                1.0 / (10.0 * self.delta)
            )))
        }
    }
}

/// Closed-form blow-up time of the Riccati barrier:
/// s* = s0 + 2/(delta (p-1)) H3(s0)^{-(p-1)/2}.
pub fn riccati_blowup_time(spec: &RiccatiSpec) -> f64 {
    spec.s0 + 2.0 / (spec.delta * (spec.p - 1.0)) * spec.h3_init().powf(-(spec.p - 1.0) / 2.0)
}

/// Closed-form solution H3(s) on s0 <= s < s*.
pub fn riccati_h3(spec: &RiccatiSpec, s: f64) -> Result<f64> {
    let s_star = riccati_blowup_time(spec);
    if !(s >= spec.s0) || s >= s_star {
        return Err(Error::domain(
            "riccati_h3",
            format!("s = {s} outside [s0, s*) = [{}, {s_star})", spec.s0),
        ));
    }
    let m = (spec.p - 1.0) / 2.0;
    let base = spec.h3_init().powf(-m) - spec.delta * m * (s - spec.s0) * (spec.p - 1.0)
        / (spec.p - 1.0);
    Ok(base.powf(-1.0 / m))
}

/// Integrate the Riccati equation with adaptive RK4 until the state passes
/// `threshold`; returns the crossing time. Past any fixed threshold the
/// remaining time to s* is O(threshold^{-(p-1)/2}), so this lands within a
/// hair of the closed form.
pub fn riccati_integrate_numeric(spec: &RiccatiSpec, threshold: f64) -> f64 {
    let mut s = spec.s0;
    let mut h = spec.h3_init();
    let rhs = |h: f64| spec.delta * h.powf((spec.p + 1.0) / 2.0);
    while h < threshold {
        // keep the relative growth per step near 2 percent
        let dt = (0.02 * h / rhs(h)).min(riccati_blowup_time(spec));
        let k1 = rhs(h);
        let k2 = rhs(h + 0.5 * dt * k1);
        let k3 = rhs(h + 0.5 * dt * k2);
        let k4 = rhs(h + dt * k3);
        h += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s += dt;
    }
    s
}

/// The subsolution H2(s) = s H3(s) with its first two derivatives in
/// closed form.
#[derive(Debug, Clone, Copy)]
pub struct SubsolutionH2 {
    spec: RiccatiSpec,
}

impl SubsolutionH2 {
    pub fn new(spec: RiccatiSpec) -> Result<Self> {
        spec.require_ordering()?;
        Ok(SubsolutionH2 { spec })
    }

    pub fn eval(&self, s: f64) -> Result<f64> {
        Ok(s * riccati_h3(&self.spec, s)?)
    }

    pub fn deriv(&self, s: f64) -> Result<f64> {
        let h3 = riccati_h3(&self.spec, s)?;
        Ok(h3 + s * self.spec.delta * h3.powf((self.spec.p + 1.0) / 2.0))
    }

    pub fn second_deriv(&self, s: f64) -> Result<f64> {
        let spec = &self.spec;
        let h3 = riccati_h3(spec, s)?;
        let h3p = spec.delta * h3.powf((spec.p + 1.0) / 2.0);
        let h3pp = spec.delta * (spec.p + 1.0) / 2.0 * h3.powf((spec.p - 1.0) / 2.0) * h3p;
        Ok(2.0 * h3p + s * h3pp)
    }
}

/// Margins of the three subsolution conditions of the barrier system,
/// checked at s0 and across a grid up to `s_frac` of the way to s*.
#[derive(Debug, Clone)]
pub struct H2Report {
    /// H2(s0) - c0 s0 / 4 (should vanish).
    pub anchor_gap: f64,
    /// c0 - H2'(s0) (should be positive).
    pub slope_margin: f64,
    /// min over the grid of K0 s^{1-p} H2^p - (eps^{p(p-1)} H2'' + 2 H2')
    /// (should be positive).
    pub inequality_margin: f64,
    pub grid_len: usize,
}

/// Verify the three lines of the subsolution system for given epsilon and
/// front constant K0 on `grid_len` points spanning [s0, s0 + s_frac (s*-s0)].
pub fn verify_h2_conditions(
    spec: &RiccatiSpec,
    epsilon: f64,
    k0: f64,
    grid_len: usize,
    s_frac: f64,
) -> Result<H2Report> {
    let sub = SubsolutionH2::new(*spec)?;
    let s_star = riccati_blowup_time(spec);
    let anchor_gap = sub.eval(spec.s0)? - spec.c0 * spec.s0 / 4.0;
    let slope_margin = spec.c0 - sub.deriv(spec.s0)?;
    let eps_pow = epsilon.powf(spec.p * (spec.p - 1.0));
    let mut inequality_margin = f64::INFINITY;
    for i in 0..grid_len {
        let s = spec.s0 + (s_star - spec.s0) * s_frac * i as f64 / (grid_len - 1).max(1) as f64;
        let lhs = eps_pow * sub.second_deriv(s)? + 2.0 * sub.deriv(s)?;
        let rhs = k0 * s.powf(1.0 - spec.p) * sub.eval(s)?.powf(spec.p);
        inequality_margin = inequality_margin.min(rhs - lhs);
    }
    Ok(H2Report {
        anchor_gap,
        slope_margin,
        inequality_margin,
        grid_len,
    })
}

/// tau = ln(1 + t).
pub fn tau_of_t(t: f64) -> f64 {
    (1.0 + t).ln()
}

/// t = e^tau - 1.
pub fn t_of_tau(tau: f64) -> f64 {
    tau.exp() - 1.0
}

/// The rescalings H0(tau) = H(e^tau - 1) and
/// H1(s) = eps^{p^2 - 2p} H0(eps^{-p(p-1)} s).
pub struct ChainTransforms<F> {
    h: F,
    p: f64,
    epsilon: f64,
}

pub fn h_chain_transform<F: Fn(f64) -> f64>(h: F, p: f64, epsilon: f64) -> ChainTransforms<F> {
    ChainTransforms { h, p, epsilon }
}

impl<F: Fn(f64) -> f64> ChainTransforms<F> {
    pub fn h0(&self, tau: f64) -> f64 {
        (self.h)(t_of_tau(tau))
    }

    pub fn h1(&self, s: f64) -> Result<f64> {
        if !(s > 0.0) {
            return Err(Error::domain("h_chain_transform", format!("s = {s} must be > 0")));
        }
        let scale = self.epsilon.powf(self.p * self.p - 2.0 * self.p);
        Ok(scale * self.h0(self.epsilon.powf(-self.p * (self.p - 1.0)) * s))
    }
}

/// Lifespan bound exp(C eps^{-p(p-1)}); +infinity when the exponent
/// exceeds the floating-point range.
pub fn lifespan_bound(epsilon: f64, c: f64, p: f64) -> Result<f64> {
    if !(epsilon > 0.0) || !(c > 0.0) || !(p > 1.0) {
        return Err(Error::domain(
            "lifespan_bound",
            format!("need epsilon, C > 0 and p > 1; got {epsilon}, {c}, {p}"),
        ));
    }
    let exponent = c * epsilon.powf(-p * (p - 1.0));
    if exponent > 709.0 {
        return Ok(f64::INFINITY);
    }
    Ok(exponent.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn comparison_quadratic_nonlinearity() {
        // a = b = 1, alpha = 1, K(0) = 2, h(0) = 1, K'(0) = h'(0) = 0
        let prob = ComparisonProblem::constant_coefficients(1.0, 1.0, 1.0, (2.0, 0.0), (1.0, 0.0));
        let verdict = comparison_integrate(&prob, 10.0, 1e-4).unwrap();
        assert!(verdict.ordering_held, "violation at {:?}", verdict.first_violation);
        assert!(verdict.h_blowup.is_some(), "lower member should blow up");

        // independent forward-Euler oracle for h at a pre-blow-up time
        let mut u = 1.0f64;
        let mut v = 0.0f64;
        let dt = 1e-6;
        let t_check = 1.0;
        for _ in 0..(t_check / dt) as usize {
            let du = v;
            let dv = u * u - v;
            u += dt * du;
            v += dt * dv;
        }
        let row = verdict
            .trace
            .iter()
            .min_by(|a, b| {
                (a.0 - t_check).abs().partial_cmp(&(b.0 - t_check).abs()).unwrap()
            })
            .unwrap();
        assert!((row.0 - t_check).abs() < 0.02);
        assert_relative_eq!(row.3, u, max_relative = 1e-2);
    }

    #[test]
    fn comparison_rejects_equal_initial_data() {
        let prob = ComparisonProblem::constant_coefficients(1.0, 1.0, 1.0, (1.0, 0.0), (1.0, 0.0));
        assert!(matches!(
            comparison_integrate(&prob, 1.0, 1e-3),
            Err(Error::InvalidComparison(_))
        ));
    }

    #[test]
    fn comparison_linear_case_gap_grows() {
        // alpha = 0: ordering preserved and the gap K - h becomes
        // nondecreasing after the initial transient
        let prob = ComparisonProblem::constant_coefficients(1.0, 1.0, 0.0, (2.0, 0.5), (1.0, 0.5));
        let verdict = comparison_integrate(&prob, 5.0, 1e-4).unwrap();
        assert!(verdict.ordering_held);
        let gaps: Vec<f64> = verdict.trace.iter().map(|r| r.1 - r.3).collect();
        let tail = &gaps[gaps.len() / 2..];
        for w in tail.windows(2) {
            assert!(w[1] >= w[0] * (1.0 - 1e-12), "gap shrank: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn riccati_closed_form_reference_point() {
        // delta = 0.01, s0 = 1, c0 = 1 (H3(s0) = 1/4), p = 2 -> s* = 401
        let spec = RiccatiSpec::new(0.01, 1.0, 1.0, 2.0).unwrap();
        assert_relative_eq!(riccati_blowup_time(&spec), 401.0, epsilon = 1e-12);

        let s_numeric = riccati_integrate_numeric(&spec, 1e8);
        assert!(s_numeric < 401.0, "crossed after s*: {s_numeric}");
        assert!(s_numeric > 390.0, "crossed too early: {s_numeric}");
        assert!((s_numeric - 401.0).abs() / 401.0 < 1e-2);
    }

    #[test]
    fn riccati_degenerate_and_scaling_limits() {
        // p -> 1+: no blow-up in the limit
        let spec = RiccatiSpec::new(0.01, 1.0, 1.0, 1.0 + 1e-6).unwrap();
        assert!(riccati_blowup_time(&spec) > 1e8);

        // doubling delta halves s* - s0 exactly
        let base = RiccatiSpec::new(0.01, 2.0, 0.1, 2.5).unwrap();
        let double = RiccatiSpec::new(0.02, 2.0, 0.1, 2.5).unwrap();
        let d1 = riccati_blowup_time(&base) - base.s0;
        let d2 = riccati_blowup_time(&double) - double.s0;
        assert_relative_eq!(d1, 2.0 * d2, epsilon = 1e-10);
    }

    #[test]
    fn chain_transform_identities() {
        // H = ln(1+t): H0(tau) = tau exactly
        let tr = h_chain_transform(|t: f64| (1.0 + t).ln(), 2.0, 1.0);
        for tau in [0.1, 1.0, 5.0] {
            assert_relative_eq!(tr.h0(tau), tau, epsilon = 1e-12);
            // eps = 1 trivialises the second rescaling
            assert_relative_eq!(tr.h1(tau).unwrap(), tr.h0(tau), epsilon = 1e-12);
        }
        assert!(tr.h1(0.0).is_err());
        assert!(tr.h1(-1.0).is_err());
    }

    #[test]
    fn chain_transform_preserves_lower_bounds() {
        // inputs with H0(tau) >= c0 eps^p tau map to H1(s) >= c0 s
        let c0 = 0.3;
        let eps = 0.5f64;
        let p = 2.2f64;
        let h = move |t: f64| c0 * eps.powf(p) * (1.0 + t).ln();
        let tr = h_chain_transform(h, p, eps);
        for s in [0.1, 1.0, 10.0, 100.0] {
            let h1 = tr.h1(s).unwrap();
            assert!(
                h1 >= c0 * s * (1.0 - 1e-12),
                "s = {s}: H1 = {h1} < c0 s = {}",
                c0 * s
            );
            assert_relative_eq!(h1, c0 * s, max_relative = 1e-12);
        }
    }

    #[test]
    fn transform_round_trip() {
        for t in [0.0, 0.5, 3.0, 1234.5] {
            let back = t_of_tau(tau_of_t(t));
            assert!((back - t).abs() <= 1e-12 * (1.0 + t));
        }
    }

    #[test]
    fn subsolution_conditions_hold_with_proper_constants() {
        // c0 << s0 << 1/delta with s0 c0 large enough for the power term
        // to dominate: c0 = 0.2, s0 = 400, delta = 1e-4, p = 2, K0 = 1.
        let spec = RiccatiSpec::new(1e-4, 400.0, 0.2, 2.0).unwrap();
        assert!(spec.ordering_ok());
        let report = verify_h2_conditions(&spec, 1.0, 1.0, 200, 0.9).unwrap();
        assert!(report.anchor_gap.abs() < 1e-12, "anchor gap {}", report.anchor_gap);
        assert!(report.slope_margin > 0.0, "H2'(s0) not below c0");
        assert!(
            report.inequality_margin > 0.0,
            "barrier inequality fails by {}",
            report.inequality_margin
        );
    }

    #[test]
    fn subsolution_anchor_and_slope_formulas() {
        let spec = RiccatiSpec::new(1e-4, 400.0, 0.2, 2.0).unwrap();
        let sub = SubsolutionH2::new(spec).unwrap();
        assert_relative_eq!(
            sub.eval(spec.s0).unwrap(),
            spec.c0 * spec.s0 / 4.0,
            epsilon = 1e-12
        );
        // H2'(s0) = c0/4 + s0 delta (c0/4)^{(p+1)/2}
        let expected = spec.c0 / 4.0
            + spec.s0 * spec.delta * (spec.c0 / 4.0f64).powf((spec.p + 1.0) / 2.0);
        assert_relative_eq!(sub.deriv(spec.s0).unwrap(), expected, max_relative = 1e-12);
        assert!(expected < spec.c0);
        // blow-up location shared with H3
        let s_star = riccati_blowup_time(&spec);
        assert!(sub.eval(s_star * (1.0 - 1e-9) - 1e-9).is_ok());
        assert!(sub.eval(s_star).is_err());
    }

    #[test]
    fn subsolution_rejects_bad_ordering() {
        // the CLI reference point delta = 0.01, s0 = 1, c0 = 1 violates
        // c0 <= s0/10, so the subsolution machinery must refuse it
        let spec = RiccatiSpec::new(0.01, 1.0, 1.0, 2.0).unwrap();
        assert!(!spec.ordering_ok());
        assert!(matches!(
            SubsolutionH2::new(spec),
            Err(Error::OrderingViolation(_))
        ));
    }

    #[test]
    fn pipeline_synthetic_h1_beats_barrier_and_blows_up_first() {
        // H1 integrates the equality version of the rescaled system with
        // H1(s0) = c0 s0, H1'(s0) = c0; it must dominate H2 = s H3 and
        // blow up before s*.
        let spec = RiccatiSpec::new(1e-4, 400.0, 0.2, 2.0).unwrap();
        let (eps, k0) = (1.0f64, 1.0f64);
        let sub = SubsolutionH2::new(spec).unwrap();
        let s_star = riccati_blowup_time(&spec);

        let eps_pow = eps.powf(spec.p * (spec.p - 1.0));
        let rhs = move |s: f64, u: f64, v: f64| {
            (k0 * s.powf(1.0 - spec.p) * signed_power(u, spec.p) - 2.0 * v) / eps_pow
        };
        let mut s = spec.s0;
        let mut u = spec.c0 * spec.s0;
        let mut v = spec.c0;
        let mut blow_s = None;
        let mut lower_bound_held = true;
        let mut dominated_barrier = true;
        while s < s_star {
            let dt = (0.01 * (u.abs() + 1.0) / (v.abs() + 1.0)).clamp(1e-6, 0.05);
            let k1u = v;
            let k1v = rhs(s, u, v);
            let k2u = v + 0.5 * dt * k1v;
            let k2v = rhs(s + 0.5 * dt, u + 0.5 * dt * k1u, v + 0.5 * dt * k1v);
            let k3u = v + 0.5 * dt * k2v;
            let k3v = rhs(s + 0.5 * dt, u + 0.5 * dt * k2u, v + 0.5 * dt * k2v);
            let k4u = v + dt * k3v;
            let k4v = rhs(s + dt, u + dt * k3u, v + dt * k3v);
            u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            s += dt;
            if !u.is_finite() || u > BLOWUP_THRESHOLD {
                blow_s = Some(s);
                break;
            }
            if u < spec.c0 * s * (1.0 - 1e-9) {
                lower_bound_held = false;
            }
            if let Ok(h2) = sub.eval(s) {
                if u <= h2 {
                    dominated_barrier = false;
                }
            }
        }
        assert!(lower_bound_held, "H1 >= c0 s failed");
        assert!(dominated_barrier, "H1 <= H2 somewhere");
        let blow_s = blow_s.expect("synthetic H1 should blow up before s*");
        assert!(blow_s < s_star, "blow-up {blow_s} not before s* = {s_star}");
    }

    #[test]
    fn lifespan_bound_values() {
        assert_relative_eq!(
            lifespan_bound(1.0, 1.0, 2.0).unwrap(),
            std::f64::consts::E,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            lifespan_bound(0.5, 1.0, 2.0).unwrap(),
            (4.0f64).exp(),
            max_relative = 1e-12
        );
        // monotone decreasing in epsilon
        let hi = lifespan_bound(0.3, 1.0, 2.0).unwrap();
        let lo = lifespan_bound(0.6, 1.0, 2.0).unwrap();
        assert!(hi > lo);
        // overflow sentinel
        assert!(lifespan_bound(1e-3, 1.0, 2.0).unwrap().is_infinite());
        assert!(lifespan_bound(0.0, 1.0, 2.0).is_err());
    }
}
