//! The functionals of the blow-up argument evaluated on numerical
//! solutions: the single-mode functional G1 = int u psi dx with its
//! differential lower bound, the weighted functional
//! G(t) = int_0^t (t-tau)(1+tau) int b_q |u|^p dx dtau, the tested-equation
//! inequality that feeds the Riccati step, and the a-priori L^p lower
//! bound. Space integrals reduce to radial ones against |S^{n-1}| r^{n-1};
//! time reductions use the stored snapshot grid.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exponents::ModelParams;
use crate::pde_solver::SimulationTrace;
use crate::quadrature::{adaptive_simpson, cumulative_trapezoid, QuadratureConfig};
use crate::special::bessel_k;
use crate::test_functions::{
    lambda_eta, lambda_eta_dt, phi_eta, sphere_area, BqEvaluator, EtaRule, TestFunctionSpec,
};

/// A radial profile r -> value, shared across threads.
#[derive(Clone)]
pub struct RadialProfile(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl RadialProfile {
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        RadialProfile(Arc::new(f))
    }

    pub fn zero() -> Self {
        RadialProfile(Arc::new(|_| 0.0))
    }

    /// The default smooth bump (1 - (2r)^2)^4 on r <= 1/2.
    pub fn standard_bump() -> Self {
        RadialProfile(Arc::new(|r: f64| {
            if r <= 0.5 {
                (1.0 - (2.0 * r).powi(2)).powi(4)
            } else {
                0.0
            }
        }))
    }

    pub fn eval(&self, r: f64) -> f64 {
        (self.0)(r)
    }
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("RadialProfile(..)")
    }
}

/// Initial displacement and velocity profiles with their common support
/// radius (at most 1/2 by the problem's support hypothesis).
#[derive(Debug, Clone)]
pub struct DataPair {
    pub f: RadialProfile,
    pub g: RadialProfile,
    pub support_radius: f64,
}

impl DataPair {
    pub fn new(f: RadialProfile, g: RadialProfile, support_radius: f64) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius <= 0.5) {
            return Err(Error::domain(
                "DataPair",
                format!("support radius {support_radius} must lie in (0, 1/2]"),
            ));
        }
        Ok(DataPair {
            f,
            g,
            support_radius,
        })
    }

    /// f = g = standard bump.
    pub fn default_bump() -> Self {
        DataPair {
            f: RadialProfile::standard_bump(),
            g: RadialProfile::standard_bump(),
            support_radius: 0.5,
        }
    }
}

/// Time series of all chain functionals on a common snapshot grid.
#[derive(Debug, Clone)]
pub struct FunctionalTrace {
    pub times: Vec<f64>,
    /// G1(t) = int u psi dx.
    pub g1: Vec<f64>,
    /// G(t) = int_0^t (t-tau)(1+tau) int b_q |u|^p dx dtau.
    pub g: Vec<f64>,
    /// G'(t) = int_0^t (1+tau) int b_q |u|^p dx dtau.
    pub g_prime: Vec<f64>,
    /// int |u|^p dx at each snapshot time.
    pub lp_norm_p: Vec<f64>,
    /// int_0^t (1+tau)^{-3} G(tau) dtau.
    pub nested_integral: Vec<f64>,
    /// int b_q |u|^p dx at each snapshot time (G'' = (1+t) times this).
    pub weighted_lp: Vec<f64>,
    /// int u b_q dx at each snapshot time.
    pub u_bq: Vec<f64>,
    /// int (mu b_q/(1+t) - 2 b_qt) u dx at each snapshot time.
    pub u_damped: Vec<f64>,
}

/// The data functional C_{f,g} = int (lambda_1(0) g + (mu - 2
/// lambda_1'(0)/lambda_1(0)) f) phi_1 dx, strictly positive for admissible
/// data.
pub fn c_fg(data: &DataPair, n: u32, mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let lam0 = lambda_eta(1.0, 0.0, mu, cfg)?;
    let lam0_dt = lambda_eta_dt(1.0, 0.0, mu, cfg)?;
    let coef = mu - 2.0 * lam0_dt / lam0;
    let area = sphere_area(n);
    let f = data.f.clone();
    let g = data.g.clone();
    let est = adaptive_simpson(
        |r: f64| {
            let phi = phi_eta(1.0, r, n, cfg).unwrap_or(f64::NAN);
            (lam0 * g.eval(r) + coef * f.eval(r)) * phi * r.powf(n as f64 - 1.0)
        },
        0.0,
        data.support_radius,
        cfg,
        "c_fg",
    )?;
    Ok(area * est.value)
}

/// The coefficient mu - 2 lambda_1'(0)/lambda_1(0) in closed Bessel form,
/// exposed for the positivity check of the chain.
pub fn c_fg_coefficient(mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let lam0 = lambda_eta(1.0, 0.0, mu, cfg)?;
    let lam0_dt = lambda_eta_dt(1.0, 0.0, mu, cfg)?;
    Ok(mu - 2.0 * lam0_dt / lam0)
}

/// The initial value of the bracket int (u_t psi - u psi_t + mu u psi) dx
/// that the integration by parts actually produces:
/// eps * int (lambda_1(0) g + (mu lambda_1(0) - lambda_1'(0)) f) phi_1 dx,
/// whose f-coefficient reduces to K_{(mu+1)/2}(1). This is the sharp
/// right-hand constant of the differential inequality on G1; the C_{f,g}
/// of [`c_fg`] overstates the f-contribution by the factor
/// (mu - 2 lambda'/lambda)/(mu lambda - lambda') and only bounds the
/// bracket for velocity-dominated data.
pub fn g1_initial_bracket(data: &DataPair, n: u32, mu: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let lam0 = lambda_eta(1.0, 0.0, mu, cfg)?;
    let lam0_dt = lambda_eta_dt(1.0, 0.0, mu, cfg)?;
    let coef = mu * lam0 - lam0_dt;
    let area = sphere_area(n);
    let f = data.f.clone();
    let g = data.g.clone();
    let est = adaptive_simpson(
        |r: f64| {
            let phi = phi_eta(1.0, r, n, cfg).unwrap_or(f64::NAN);
            (lam0 * g.eval(r) + coef * f.eval(r)) * phi * r.powf(n as f64 - 1.0)
        },
        0.0,
        data.support_radius,
        cfg,
        "g1_initial_bracket",
    )?;
    Ok(area * est.value)
}

/// Unit-constant version of the a-priori lower bound
/// int |u|^p dx >= C eps^p (1+t)^{n-1-(n+mu-1)p/2}.
pub fn lp_lower_bound(t: f64, params: &ModelParams) -> f64 {
    let n = params.n as f64;
    params
        .epsilon
        .powf(params.p)
        * (1.0 + t).powf(n - 1.0 - (n + params.mu - 1.0) * params.p / 2.0)
}

/// Grid evaluator for b_q-type weights over a fixed (time, radius) grid.
/// The eta rule is frozen once; the Bessel factor is tabulated per
/// (eta node, time) and the plane-wave factor per (eta node, radius), so
/// one b_q value costs one inner product. This is where the phi cache of
/// the b_q evaluation contract lives.
struct BqGrid {
    /// bq[j][i] = b_q(r_i, t_j).
    values: Vec<Vec<f64>>,
}

impl BqGrid {
    fn build(
        spec: &TestFunctionSpec,
        order: f64,
        rate: f64,
        times: &[f64],
        radii: &[f64],
    ) -> Result<Self> {
        let t_max = times.iter().cloned().fold(0.0, f64::max);
        let coarse = QuadratureConfig::coarse();
        let rule = EtaRule::build(spec.q, rate, t_max, &coarse);
        let pairs = rule.pairs();
        let omega = 2.0 * std::f64::consts::PI.powf((spec.n as f64 - 1.0) / 2.0)
            / crate::special::gamma_fn((spec.n as f64 - 1.0) / 2.0)?;
        let half = (spec.mu + 1.0) / 2.0;

        // lambda-type factor per (node, time): s^{(mu+1)/2} K_order(s) e^{-s}
        let mut lam = vec![vec![0.0; times.len()]; pairs.len()];
        for (jn, &(eta, _)) in pairs.iter().enumerate() {
            for (jt, &t) in times.iter().enumerate() {
                let s = eta * (t + 1.0);
                let (hat, _) = crate::special::bessel_k_scaled(order, s, &coarse)?;
                lam[jn][jt] = s.powf(half) * hat * (-s).exp();
            }
        }
        // plane-wave factor per (node, radius): omega e^{eta r} phi_hat
        let mut phi = vec![vec![0.0; radii.len()]; pairs.len()];
        for (jn, &(eta, _)) in pairs.iter().enumerate() {
            for (ir, &r) in radii.iter().enumerate() {
                phi[jn][ir] = phi_eta(eta, r, spec.n, &coarse)? / omega;
            }
        }
        let mut values = vec![vec![0.0; radii.len()]; times.len()];
        for (jt, row) in values.iter_mut().enumerate() {
            for (ir, slot) in row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (jn, &(_, w)) in pairs.iter().enumerate() {
                    acc += w * lam[jn][jt] * phi[jn][ir];
                }
                *slot = acc * omega;
            }
        }
        Ok(BqGrid { values })
    }
}

fn simpson_weights(len: usize, dx: f64) -> Vec<f64> {
    // composite Simpson weights; a trailing 3/8 panel handles odd interval
    // counts, mirroring quadrature::simpson_uniform
    let mut w = vec![0.0; len];
    if len < 2 {
        return w;
    }
    if len == 2 {
        w[0] = 0.5 * dx;
        w[1] = 0.5 * dx;
        return w;
    }
    let intervals = len - 1;
    let simpson_end = if intervals.is_multiple_of(2) { len - 1 } else { len - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += dx / 3.0;
        w[i + 1] += 4.0 * dx / 3.0;
        w[i + 2] += dx / 3.0;
        i += 2;
    }
    if !intervals.is_multiple_of(2) {
        let b = 3.0 * dx / 8.0;
        w[len - 4] += b;
        w[len - 3] += 3.0 * b;
        w[len - 2] += 3.0 * b;
        w[len - 1] += b;
    }
    w
}

/// Compute the full functional chain on a solution trace. Needs snapshots;
/// the radial grid must cover the light cone of the recorded window.
pub fn g_functional(trace: &SimulationTrace, spec: &TestFunctionSpec) -> Result<FunctionalTrace> {
    if trace.snapshots.len() < 3 {
        return Err(Error::GridCoverage(
            "trace carries too few snapshots; rerun with snapshot_every > 0".into(),
        ));
    }
    let t_end = trace.snapshots.last().unwrap().t;
    let r_max = *trace.grid.last().unwrap();
    if r_max < t_end + 0.5 - 1e-9 {
        return Err(Error::GridCoverage(format!(
            "grid radius {r_max} does not cover the support radius {} at the last snapshot",
            t_end + 0.5
        )));
    }
    if spec.n != trace.params.n {
        return Err(Error::InvalidConfig(
            "test-function dimension differs from the trace's".into(),
        ));
    }

    let times: Vec<f64> = trace.snapshots.iter().map(|s| s.t).collect();
    let radii = &trace.grid;
    let p = trace.params.p;
    let n = trace.params.n as f64;
    let mu = spec.mu;
    let area = sphere_area(trace.params.n);

    let rate = spec.q + spec.mu.min(1.0);
    let base = BqGrid::build(spec, (mu - 1.0) / 2.0, rate, &times, radii)?;
    // tilde companion at order q+1 for b_qt = mu/(1+t) b_q - b~_{q+1}
    let spec_up = spec.with_q(spec.q + 1.0)?;
    let tilde = BqGrid::build(&spec_up, (mu + 1.0) / 2.0, spec_up.q, &times, radii)?;

    let cfg = QuadratureConfig::coarse();
    let rw = simpson_weights(radii.len(), trace.dr);
    let mut weighted_lp = Vec::with_capacity(times.len());
    let mut lp_norm_p = Vec::with_capacity(times.len());
    let mut u_bq = Vec::with_capacity(times.len());
    let mut u_damped = Vec::with_capacity(times.len());
    let mut g1 = Vec::with_capacity(times.len());

    // psi factors on the grid
    let phi1: Vec<f64> = radii
        .iter()
        .map(|&r| phi_eta(1.0, r, spec.n, &cfg))
        .collect::<Result<_>>()?;
    let lam1: Vec<f64> = times
        .iter()
        .map(|&t| lambda_eta(1.0, t, mu, &cfg))
        .collect::<Result<_>>()?;

    for (jt, snap) in trace.snapshots.iter().enumerate() {
        let tau = snap.t;
        let mut acc_w = 0.0;
        let mut acc_lp = 0.0;
        let mut acc_ubq = 0.0;
        let mut acc_damp = 0.0;
        let mut acc_g1 = 0.0;
        for (ir, (&u, &r)) in snap.u.iter().zip(radii.iter()).enumerate() {
            let vol = rw[ir] * r.powf(n - 1.0);
            let up = u.abs().powf(p);
            let bq = base.values[jt][ir];
            let btilde = tilde.values[jt][ir];
            acc_w += vol * bq * up;
            acc_lp += vol * up;
            acc_ubq += vol * bq * u;
            // mu b_q/(1+tau) u - 2 b_qt u = (2 b~_{q+1} - mu b_q/(1+tau)) u
            acc_damp += vol * (2.0 * btilde - mu * bq / (1.0 + tau)) * u;
            acc_g1 += vol * u * lam1[jt] * phi1[ir];
        }
        weighted_lp.push(area * acc_w);
        lp_norm_p.push(area * acc_lp);
        u_bq.push(area * acc_ubq);
        u_damped.push(area * acc_damp);
        g1.push(area * acc_g1);
    }

    let integrand_gp: Vec<f64> = times
        .iter()
        .zip(&weighted_lp)
        .map(|(&t, &w)| (1.0 + t) * w)
        .collect();
    let g_prime = cumulative_trapezoid(&times, &integrand_gp);
    let g = cumulative_trapezoid(&times, &g_prime);
    let integrand_nested: Vec<f64> = times
        .iter()
        .zip(&g)
        .map(|(&t, &gv)| (1.0 + t).powi(-3) * gv)
        .collect();
    let nested_integral = cumulative_trapezoid(&times, &integrand_nested);

    Ok(FunctionalTrace {
        times,
        g1,
        g,
        g_prime,
        lp_norm_p,
        nested_integral,
        weighted_lp,
        u_bq,
        u_damped,
    })
}

/// Both sides of the tested-equation inequality 1/2 int_0^t (t-tau)^2 int
/// b_q |u|^p <= int_0^t int u b_q + int_0^t (t-tau) int (mu b_q/(1+tau) -
/// 2 b_qt) u, evaluated with the shared trapezoid reduction on the
/// functional grid.
#[derive(Debug, Clone, Copy)]
pub struct IneqSample {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn check_ineq(ftrace: &FunctionalTrace) -> Vec<IneqSample> {
    let times = &ftrace.times;
    let mut out = Vec::new();
    for (k, &t) in times.iter().enumerate() {
        if k < 2 {
            continue;
        }
        let sub = &times[..=k];
        let lhs_int: Vec<f64> = sub
            .iter()
            .zip(&ftrace.weighted_lp)
            .map(|(&tau, &w)| 0.5 * (t - tau).powi(2) * w)
            .collect();
        let rhs1: Vec<f64> = ftrace.u_bq[..=k].to_vec();
        let rhs2: Vec<f64> = sub
            .iter()
            .zip(&ftrace.u_damped)
            .map(|(&tau, &z)| (t - tau) * z)
            .collect();
        let lhs = *cumulative_trapezoid(sub, &lhs_int).last().unwrap();
        let rhs = *cumulative_trapezoid(sub, &rhs1).last().unwrap()
            + *cumulative_trapezoid(sub, &rhs2).last().unwrap();
        out.push(IneqSample { t, lhs, rhs });
    }
    out
}

/// Triple-integration identity: int_0^t (t-tau)^2 int b_q |u|^p dx dtau
/// = 2 (t+1)^2 int_0^t (1+tau)^{-3} G(tau) dtau. Returns (lhs, rhs) at the
/// final grid time.
pub fn triple_integration_identity(ftrace: &FunctionalTrace) -> (f64, f64) {
    let t = *ftrace.times.last().unwrap();
    let lhs_int: Vec<f64> = ftrace
        .times
        .iter()
        .zip(&ftrace.weighted_lp)
        .map(|(&tau, &w)| (t - tau).powi(2) * w)
        .collect();
    let lhs = *cumulative_trapezoid(&ftrace.times, &lhs_int).last().unwrap();
    let rhs = 2.0 * (t + 1.0).powi(2) * ftrace.nested_integral.last().unwrap();
    (lhs, rhs)
}

/// Ratio scan of the key differential inequality
/// G'(t) >= K (ln(1+t))^{1-p} (1+t) (int_0^t (1+tau)^{-3} G)^p for t > 2.
#[derive(Debug, Clone)]
pub struct KeyInequalityReport {
    /// Fitted constant: the infimum of the ratio over the window.
    pub k_inf: f64,
    pub n_samples: usize,
    pub all_positive: bool,
    pub window: (f64, f64),
}

pub fn check_key_inequality(ftrace: &FunctionalTrace, p: f64) -> Result<KeyInequalityReport> {
    let mut k_inf = f64::INFINITY;
    let mut n_samples = 0;
    let mut all_positive = true;
    let mut window = (f64::MAX, f64::MIN);
    for ((&t, &gp), &nested) in ftrace
        .times
        .iter()
        .zip(&ftrace.g_prime)
        .zip(&ftrace.nested_integral)
    {
        if t <= 2.0 || nested <= 0.0 {
            continue;
        }
        let denom = (1.0 + t).ln().powf(1.0 - p) * (1.0 + t) * nested.powf(p);
        let ratio = gp / denom;
        if !(ratio > 0.0) {
            all_positive = false;
        }
        k_inf = k_inf.min(ratio);
        n_samples += 1;
        window.0 = window.0.min(t);
        window.1 = window.1.max(t);
    }
    if n_samples < 10 {
        return Err(Error::InsufficientData(format!(
            "key-inequality window too short: {n_samples} samples with t > 2"
        )));
    }
    Ok(KeyInequalityReport {
        k_inf,
        n_samples,
        all_positive,
        window,
    })
}

/// Least-squares coefficient of t^2 in G(t) over t > t_lo (the quadratic
/// seed of the Riccati step).
pub fn quadratic_seed_coefficient(ftrace: &FunctionalTrace, t_lo: f64) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut count = 0;
    for (&t, &g) in ftrace.times.iter().zip(&ftrace.g) {
        if t > t_lo {
            num += g * t * t;
            den += t.powi(4);
            count += 1;
        }
    }
    if count < 3 {
        return Err(Error::InsufficientData(format!(
            "only {count} samples beyond t_lo = {t_lo}"
        )));
    }
    Ok(num / den)
}

/// Diagnostics of the single-mode chain: the differential inequality
/// G1' + (mu/(1+t) - 2 lambda_1'/lambda_1) G1 >= eps * (initial bracket)
/// and the integrated lower bound on G1 itself.
#[derive(Debug, Clone)]
pub struct G1Report {
    /// The C_{f,g} combination as displayed in the chain (reported).
    pub c_fg: f64,
    /// The derived initial bracket actually bounding the inequality.
    pub initial_bracket: f64,
    /// Minimum of (G1' + coef G1 - eps B) over the window, scaled by eps B.
    pub min_residual_rel: f64,
    /// Minimum of G1 - eps B (1+t) K^2 int ds/((1+s) K^2), same scaling.
    pub min_bound_gap_rel: f64,
}

pub fn check_g1_chain(
    ftrace: &FunctionalTrace,
    data: &DataPair,
    params: &ModelParams,
    cfg: &QuadratureConfig,
) -> Result<G1Report> {
    let n = params.n;
    let mu = params.mu;
    let eps = params.epsilon;
    let c = c_fg(data, n, mu, cfg)?;
    let bracket = g1_initial_bracket(data, n, mu, cfg)?;
    let scale = eps * bracket;
    let times = &ftrace.times;
    let g1 = &ftrace.g1;
    let len = times.len();
    if len < 5 {
        return Err(Error::InsufficientData("trace too short for G1 chain".into()));
    }

    let nu = (mu - 1.0) / 2.0;
    let mut min_residual = f64::INFINITY;
    for i in 0..len {
        // central differences inside, one-sided second order at the ends
        let d = if i == 0 {
            (-3.0 * g1[0] + 4.0 * g1[1] - g1[2]) / (times[2] - times[0])
        } else if i == len - 1 {
            (3.0 * g1[len - 1] - 4.0 * g1[len - 2] + g1[len - 3])
                / (times[len - 1] - times[len - 3])
        } else {
            (g1[i + 1] - g1[i - 1]) / (times[i + 1] - times[i - 1])
        };
        let t = times[i];
        let lam = lambda_eta(1.0, t, mu, cfg)?;
        let lam_dt = lambda_eta_dt(1.0, t, mu, cfg)?;
        let coef = mu / (1.0 + t) - 2.0 * lam_dt / lam;
        let residual = d + coef * g1[i] - scale;
        min_residual = min_residual.min(residual / scale);
    }

    // integrated bound: G1(t) >= eps C (1+t) K^2(1+t) int_0^t ds/((1+s) K^2(1+s))
    let k_sq: Vec<f64> = times
        .iter()
        .map(|&t| bessel_k(nu, 1.0 + t, cfg).map(|e| e.value * e.value))
        .collect::<Result<_>>()?;
    let integrand: Vec<f64> = times
        .iter()
        .zip(&k_sq)
        .map(|(&s, &k2)| 1.0 / ((1.0 + s) * k2))
        .collect();
    let inner = cumulative_trapezoid(times, &integrand);
    let mut min_gap = f64::INFINITY;
    for i in 0..len {
        let bound = scale * (1.0 + times[i]) * k_sq[i] * inner[i];
        min_gap = min_gap.min((g1[i] - bound) / scale);
    }

    Ok(G1Report {
        c_fg: c,
        initial_bracket: bracket,
        min_residual_rel: min_residual,
        min_bound_gap_rel: min_gap,
    })
}

/// Time series of G1(t) = int u psi dx over the snapshot grid of a run,
/// without the b_q machinery of the full chain.
pub fn g1_functional(trace: &SimulationTrace, n: u32, mu: f64) -> Result<Vec<f64>> {
    if trace.snapshots.is_empty() {
        return Err(Error::GridCoverage(
            "trace carries no snapshots; rerun with snapshot_every > 0".into(),
        ));
    }
    if n != trace.params.n {
        return Err(Error::InvalidConfig(
            "dimension differs from the trace's".into(),
        ));
    }
    let cfg = QuadratureConfig::coarse();
    let area = sphere_area(n);
    let nf = n as f64;
    let rw = simpson_weights(trace.grid.len(), trace.dr);
    let phi1: Vec<f64> = trace
        .grid
        .iter()
        .map(|&r| phi_eta(1.0, r, n, &cfg))
        .collect::<Result<_>>()?;
    trace
        .snapshots
        .iter()
        .map(|snap| {
            let lam = lambda_eta(1.0, snap.t, mu, &cfg)?;
            let mut acc = 0.0;
            for (ir, (&u, &r)) in snap.u.iter().zip(&trace.grid).enumerate() {
                acc += rw[ir] * r.powf(nf - 1.0) * u * lam * phi1[ir];
            }
            Ok(area * acc)
        })
        .collect()
}

/// The boundary term dropped when deriving the tested-equation inequality:
/// int (g b_q(x, 0) + f b~_{q+1}(x, 0)) dx, positive for admissible data.
pub fn dropped_boundary_term(data: &DataPair, spec: &TestFunctionSpec) -> Result<f64> {
    let base = BqEvaluator::for_b_q(spec, 0.0)?;
    let spec_up = spec.with_q(spec.q + 1.0)?;
    let tilde = BqEvaluator::for_b_q_tilde(&spec_up, 0.0)?;
    let n = spec.n as f64;
    let samples = 33usize;
    let dr = data.support_radius / (samples - 1) as f64;
    let vals: Vec<f64> = (0..samples)
        .map(|i| {
            let r = i as f64 * dr;
            let bq0 = base.eval(r, 0.0)?;
            let bt0 = tilde.eval(r, 0.0)?;
            Ok((data.g.eval(r) * bq0 + data.f.eval(r) * bt0) * r.powf(n - 1.0))
        })
        .collect::<Result<_>>()?;
    Ok(sphere_area(spec.n) * crate::quadrature::simpson_uniform(&vals, dr))
}

/// Least-squares slope of ln(int |u|^p dx) against ln(1+t) over a window,
/// for comparison with the a-priori lower-bound exponent.
pub fn lp_slope(trace: &SimulationTrace, window: (f64, f64)) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &lp) in trace.times.iter().zip(&trace.lp_integral) {
        if t >= window.0 && t <= window.1 && lp > 0.0 {
            xs.push((1.0 + t).ln());
            ys.push(lp.ln());
        }
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "only {} usable samples in the window",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Smallest ratio of the measured L^p mass to the unit-constant lower
/// bound over the window: the fitted constant C of the a-priori bound.
pub fn fitted_lower_bound_constant(
    trace: &SimulationTrace,
    params: &ModelParams,
    window: (f64, f64),
) -> Result<f64> {
    let mut c = f64::INFINITY;
    let mut count = 0;
    for (&t, &lp) in trace.times.iter().zip(&trace.lp_integral) {
        if t >= window.0 && t <= window.1 && lp > 0.0 {
            c = c.min(lp / lp_lower_bound(t, params));
            count += 1;
        }
    }
    if count < 4 {
        return Err(Error::InsufficientData(
            "too few samples for the lower-bound constant".into(),
        ));
    }
    Ok(c)
}
