//! Radial finite-difference solver for
//!
//!   u_tt - Delta u + mu/(1+t) u_t = |u|^p,     u(0) = eps f, u_t(0) = eps g,
//!
//! with compactly supported radial data. Explicit leapfrog in time; the
//! damping term is taken as the half-step average (mu/(1+t)) (u^{k+1} -
//! u^{k-1})/(2 dt), which keeps the update a scalar linear solve per node.
//! The origin uses the radial regularity limit Delta u -> n u_rr with a
//! ghost node u(-dr) = u(dr).
//!
//! Blow-up is declared when sup|u| passes the configured threshold; the
//! reported time is the midpoint of the last stable and first
//! over-threshold steps. Sweeps over epsilon fan out across threads and
//! merge deterministically; scaling fits regress the measured lifespans in
//! the coordinates of the critical or subcritical law.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exponents::ModelParams;
use crate::functional_chain::DataPair;
use crate::quadrature::simpson_uniform;
use crate::test_functions::sphere_area;

/// Grid, stability, and stopping parameters for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Radial grid spacing.
    pub dr: f64,
    /// Courant number in (0, 1]; dt = cfl * dr. The origin row carries an
    /// effective factor sqrt(n), so cfl <= 1/sqrt(n) is the stable region.
    pub cfl: f64,
    /// Domain radius; must cover the light cone, r_max >= t_max + 1/2.
    pub r_max: f64,
    /// sup|u| threshold declaring blow-up.
    pub blowup_threshold: f64,
    /// Wall-clock cutoff in simulation time.
    pub t_max: f64,
    /// Keep a full field snapshot every this many steps (0 = none).
    pub snapshot_every: usize,
    /// Drop the |u|^p source term (linear runs for convergence tests).
    pub nonlinear: bool,
    /// Relative amplitude defining the numerical support radius. Below
    /// this fraction of sup|u| lies the scheme's dispersive tail, which
    /// leaks past the light cone at O(dr^2) amplitude.
    pub support_tol_rel: f64,
}

impl SolverConfig {
    pub fn new(dr: f64, cfl: f64, t_max: f64) -> Result<Self> {
        let cfg = SolverConfig {
            dr,
            cfl,
            r_max: t_max + 0.5 + 4.0 * dr,
            blowup_threshold: 1e8,
            t_max,
            snapshot_every: 0,
            nonlinear: true,
            support_tol_rel: 5e-3,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dr > 0.0) {
            return Err(Error::InvalidConfig(format!("dr = {} must be > 0", self.dr)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl = {} must lie in (0, 1]",
                self.cfl
            )));
        }
        if !(self.blowup_threshold > 0.0) || !(self.t_max > 0.0) {
            return Err(Error::InvalidConfig(
                "blowup_threshold and t_max must be positive".into(),
            ));
        }
        if self.r_max < self.t_max + 0.5 {
            return Err(Error::InvalidConfig(format!(
                "r_max = {} cannot contain the light cone t_max + 1/2 = {}",
                self.r_max,
                self.t_max + 0.5
            )));
        }
        Ok(())
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    BlewUp,
    Censored,
    Unstable,
}

/// Lifespan measurement for one (epsilon, configuration) pair.
#[derive(Debug, Clone, Copy)]
pub struct LifespanEstimate {
    pub epsilon: f64,
    /// Blow-up time; equals t_max for censored runs.
    pub t_blowup: f64,
    pub max_amplitude: f64,
    pub status: RunStatus,
}

/// Full radial field at one recorded time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub u: Vec<f64>,
}

/// Time series of solution norms plus optional field snapshots.
#[derive(Debug, Clone)]
pub struct SimulationTrace {
    pub params: ModelParams,
    pub dr: f64,
    pub dt: f64,
    /// Radial nodes r_i = i dr.
    pub grid: Vec<f64>,
    pub times: Vec<f64>,
    pub sup_abs: Vec<f64>,
    /// int |u|^p dx over R^n (surface factor included).
    pub lp_integral: Vec<f64>,
    /// Largest radius carrying non-negligible amplitude.
    pub support_radius: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl SimulationTrace {
    /// Copy of the trace cut off once sup|u| first exceeds `factor` times
    /// its initial value. The chain functionals need this window: past it
    /// the blow-up spike is unresolvable by any fixed time grid.
    pub fn pre_blowup_window(&self, factor: f64) -> SimulationTrace {
        let initial = self.sup_abs.first().copied().unwrap_or(0.0);
        let cap = factor * initial.max(f64::MIN_POSITIVE);
        let keep = self
            .sup_abs
            .iter()
            .position(|&s| s > cap)
            .unwrap_or(self.sup_abs.len());
        let t_cut = if keep == 0 {
            0.0
        } else {
            self.times[keep - 1]
        };
        SimulationTrace {
            params: self.params,
            dr: self.dr,
            dt: self.dt,
            grid: self.grid.clone(),
            times: self.times[..keep].to_vec(),
            sup_abs: self.sup_abs[..keep].to_vec(),
            lp_integral: self.lp_integral[..keep].to_vec(),
            support_radius: self.support_radius[..keep].to_vec(),
            snapshots: self
                .snapshots
                .iter()
                .filter(|s| s.t <= t_cut)
                .cloned()
                .collect(),
        }
    }
}

fn radial_laplacian(u: &[f64], i: usize, n: f64, dr: f64) -> f64 {
    if i == 0 {
        // ghost symmetry u(-dr) = u(dr): Delta u|_0 = n u_rr = 2n (u_1 - u_0)/dr^2
        2.0 * n * (u[1] - u[0]) / (dr * dr)
    } else {
        let d2 = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dr * dr);
        let d1 = (u[i + 1] - u[i - 1]) / (2.0 * dr);
        d2 + (n - 1.0) / (i as f64 * dr) * d1
    }
}

/// Integrate one problem instance. Returns the recorded trace and the
/// lifespan verdict.
pub fn run(
    params: &ModelParams,
    data: &DataPair,
    cfg: &SolverConfig,
) -> Result<(SimulationTrace, LifespanEstimate)> {
    cfg.validate()?;
    if data.support_radius > 0.5 {
        return Err(Error::GridCoverage(format!(
            "data support radius {} exceeds 1/2",
            data.support_radius
        )));
    }

    let n = params.n as f64;
    let p = params.p;
    let eps = params.epsilon;
    let m = (cfg.r_max / cfg.dr).round() as usize;
    if m < 8 {
        return Err(Error::InvalidConfig("fewer than 8 radial cells".into()));
    }
    let dr = cfg.dr;
    let dt = cfg.cfl * dr;
    let grid: Vec<f64> = (0..=m).map(|i| i as f64 * dr).collect();

    // data checks on the actual grid: nonnegative, supported in r <= 1/2
    let mut any_positive = false;
    for &r in &grid {
        let (fv, gv) = (data.f.eval(r), data.g.eval(r));
        if fv < 0.0 || gv < 0.0 {
            return Err(Error::GridCoverage(format!(
                "data must be nonnegative; found f({r}) = {fv}, g({r}) = {gv}"
            )));
        }
        if r > data.support_radius + 1e-12 && (fv != 0.0 || gv != 0.0) {
            return Err(Error::GridCoverage(format!(
                "data leaks outside its declared support at r = {r}"
            )));
        }
        any_positive |= fv > 0.0 || gv > 0.0;
    }
    if !any_positive && eps > 0.0 {
        // zero data propagates as the zero solution; still a valid run
    }

    let steps = (cfg.t_max / dt).ceil() as usize;
    let area = sphere_area(params.n);
    let source = |u: f64| if cfg.nonlinear { u.abs().powf(p) } else { 0.0 };

    let mut trace = SimulationTrace {
        params: *params,
        dr,
        dt,
        grid: grid.clone(),
        times: Vec::with_capacity(steps + 1),
        sup_abs: Vec::with_capacity(steps + 1),
        lp_integral: Vec::with_capacity(steps + 1),
        support_radius: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
    };

    let mut prev: Vec<f64> = grid.iter().map(|&r| eps * data.f.eval(r)).collect();
    let vel0: Vec<f64> = grid.iter().map(|&r| eps * data.g.eval(r)).collect();
    prev[m] = 0.0;

    let record = |trace: &mut SimulationTrace, t: f64, u: &[f64], step: usize| {
        let sup = u.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        let weighted: Vec<f64> = u
            .iter()
            .zip(&trace.grid)
            .map(|(&ui, &r)| ui.abs().powf(p) * r.powf(n - 1.0))
            .collect();
        trace.times.push(t);
        trace.sup_abs.push(sup);
        trace.lp_integral.push(area * simpson_uniform(&weighted, dr));
        let tol = cfg.support_tol_rel * sup.max(1e-300);
        let support = trace
            .grid
            .iter()
            .zip(u)
            .rev()
            .find(|(_, &ui)| ui.abs() > tol)
            .map(|(&r, _)| r)
            .unwrap_or(0.0);
        trace.support_radius.push(support);
        if cfg.snapshot_every > 0 && step.is_multiple_of(cfg.snapshot_every) {
            trace.snapshots.push(Snapshot {
                t,
                u: u.to_vec(),
            });
        }
    };

    record(&mut trace, 0.0, &prev, 0);

    // second-order Taylor start: u^1 = u^0 + dt v + dt^2/2 (L u^0 + |u^0|^p - mu v)
    let mut curr = vec![0.0; m + 1];
    for i in 0..m {
        let lap = radial_laplacian(&prev, i, n, dr);
        curr[i] = prev[i]
            + dt * vel0[i]
            + 0.5 * dt * dt * (lap + source(prev[i]) - params.mu * vel0[i]);
    }
    curr[m] = 0.0;
    record(&mut trace, dt, &curr, 1);

    let mut status = RunStatus::Censored;
    let mut t_blowup = cfg.t_max;
    let mut max_amplitude = trace.sup_abs.iter().cloned().fold(0.0, f64::max);

    let mut next = vec![0.0; m + 1];
    let mut k = 1usize;
    'time: while k < steps {
        let t_k = k as f64 * dt;
        let beta = params.mu * dt / (2.0 * (1.0 + t_k));
        for i in 0..m {
            let lap = radial_laplacian(&curr, i, n, dr);
            next[i] = (2.0 * curr[i] - (1.0 - beta) * prev[i]
                + dt * dt * (lap + source(curr[i])))
                / (1.0 + beta);
        }
        next[m] = 0.0;

        let t_next = t_k + dt;
        let mut sup = 0.0f64;
        for &x in next.iter() {
            if !x.is_finite() {
                status = RunStatus::Unstable;
                t_blowup = t_next;
                break 'time;
            }
            sup = sup.max(x.abs());
        }
        max_amplitude = max_amplitude.max(sup);
        record(&mut trace, t_next, &next, k + 1);
        if sup > cfg.blowup_threshold {
            status = RunStatus::BlewUp;
            // midpoint of last stable and first over-threshold step
            t_blowup = t_k + 0.5 * dt;
            break;
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
        k += 1;
    }

    let estimate = LifespanEstimate {
        epsilon: eps,
        t_blowup,
        max_amplitude,
        status,
    };
    Ok((trace, estimate))
}

/// Independent runs for each epsilon, distributed across worker threads
/// and merged back in input order. Censored runs are kept and flagged.
pub fn sweep(
    params_base: &ModelParams,
    epsilons: &[f64],
    data: &DataPair,
    cfg: &SolverConfig,
) -> Result<Vec<LifespanEstimate>> {
    if epsilons.is_empty() {
        return Err(Error::InsufficientData("empty epsilon list".into()));
    }
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::domain("sweep", "all epsilon values must be positive"));
    }
    if epsilons.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("sweep", "epsilon list must be sorted ascending"));
    }
    // snapshots are per-run diagnostics; a sweep keeps only the estimates
    let mut run_cfg = cfg.clone();
    run_cfg.snapshot_every = 0;
    epsilons
        .par_iter()
        .map(|&eps| {
            let params = ModelParams {
                epsilon: eps,
                ..*params_base
            };
            run(&params, data, &run_cfg).map(|(_, est)| est)
        })
        .collect()
}

/// Which lifespan law a fit targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// ln T regressed on eps^{-p(p-1)} (exponential law at the critical
    /// exponent).
    Critical,
    /// ln T regressed on ln eps (power law below the critical exponent,
    /// predicted slope -2p(p-1)/gamma(p, n+mu)).
    Subcritical,
}

/// Least-squares result in the fit-mode coordinates.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub mode: FitMode,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_used: usize,
    pub n_censored: usize,
    /// Human-readable description of the regressor.
    pub transformed_x: String,
}

/// Fit the measured lifespans in the coordinates of `mode`. Censored and
/// unstable runs are excluded (and counted); at least 4 usable points are
/// required.
pub fn fit_scaling(
    results: &[LifespanEstimate],
    mode: FitMode,
    params: &ModelParams,
) -> Result<ScalingFit> {
    let usable: Vec<&LifespanEstimate> = results
        .iter()
        .filter(|r| r.status == RunStatus::BlewUp)
        .collect();
    let n_censored = results.len() - usable.len();
    if usable.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "need >= 4 uncensored blow-up points, have {}",
            usable.len()
        )));
    }
    let p = params.p;
    let (xs, ys): (Vec<f64>, Vec<f64>) = usable
        .iter()
        .map(|r| {
            let x = match mode {
                FitMode::Critical => r.epsilon.powf(-p * (p - 1.0)),
                FitMode::Subcritical => r.epsilon.ln(),
            };
            (x, r.t_blowup.ln())
        })
        .unzip();
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(Error::InsufficientData(
            "degenerate regressor (all epsilon equal?)".into(),
        ));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res < 1e-300 {
        1.0
    } else {
        0.0
    };
    Ok(ScalingFit {
        mode,
        slope,
        intercept,
        r_squared,
        n_used: usable.len(),
        n_censored,
        transformed_x: match mode {
            FitMode::Critical => "eps^(-p(p-1))".to_string(),
            FitMode::Subcritical => "ln(eps)".to_string(),
        },
    })
}
