//! One-dimensional quadrature kernels shared by the special-function and
//! test-function evaluators: adaptive Simpson refinement with an error
//! estimate, Gauss-Legendre panel rules, and grid rules for sampled data.

use crate::error::{Error, Result};

/// Tolerances and budgets for the integral evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Absolute tolerance floor.
    pub abs_tol: f64,
    /// Maximum bisection depth before an interval is declared non-convergent.
    pub max_refinements: u32,
    /// Cut-off magnitude used when truncating semi-infinite integrals: the
    /// neglected tail is kept below `abs_tol` times this bound.
    pub truncation_bound: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_refinements: 48,
            truncation_bound: 1.0,
        }
    }
}

impl QuadratureConfig {
    /// Looser preset for grid evaluators where 1e-6 relative is plenty.
    pub fn coarse() -> Self {
        QuadratureConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_refinements: 40,
            truncation_bound: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_refinements < 1 {
            return Err(Error::InvalidConfig(
                "max_refinements must be at least 1".into(),
            ));
        }
        if !(self.truncation_bound > 0.0) {
            return Err(Error::InvalidConfig(
                "truncation_bound must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Integral value plus an accumulated error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

struct Frame {
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    s: f64,
    tol: f64,
    depth: u32,
}

/// Adaptive Simpson integration of `f` over `[a, b]`.
///
/// The interval is seeded with `seed_panels` equal panels so that narrow
/// interior peaks are not missed by the first bisection test. Termination is
/// local (the classic |S2-S1| <= 15 tol test with halved tolerances), and the
/// accumulated error estimate is checked against
/// `max(abs_tol, rel_tol * |I|)` at the end.
pub fn adaptive_simpson<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    what: &'static str,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::domain(what, format!("bad interval [{a}, {b}]")));
    }
    cfg.validate()?;

    let seed_panels: usize = 32;
    let h = (b - a) / seed_panels as f64;
    let mut xs = Vec::with_capacity(2 * seed_panels + 1);
    for i in 0..=(2 * seed_panels) {
        xs.push(f(a + 0.5 * h * i as f64));
    }
    let mut coarse = 0.0;
    for i in 0..seed_panels {
        coarse += simpson(xs[2 * i], xs[2 * i + 1], xs[2 * i + 2], h);
    }
    let global_tol = cfg.abs_tol.max(cfg.rel_tol * coarse.abs());

    let mut stack: Vec<Frame> = (0..seed_panels)
        .map(|i| Frame {
            a: a + h * i as f64,
            b: a + h * (i + 1) as f64,
            fa: xs[2 * i],
            fm: xs[2 * i + 1],
            fb: xs[2 * i + 2],
            s: simpson(xs[2 * i], xs[2 * i + 1], xs[2 * i + 2], h),
            tol: global_tol / seed_panels as f64,
            depth: 0,
        })
        .collect();

    let mut total = 0.0;
    let mut err_acc = 0.0;
    let mut worst_residual: f64 = 0.0;

    while let Some(fr) = stack.pop() {
        let m = 0.5 * (fr.a + fr.b);
        let hl = m - fr.a;
        let flm = f(0.5 * (fr.a + m));
        let frm = f(0.5 * (m + fr.b));
        let sl = simpson(fr.fa, flm, fr.fm, hl);
        let sr = simpson(fr.fm, frm, fr.fb, hl);
        let delta = sl + sr - fr.s;
        let machine_floor = 1e-16 * (sl.abs() + sr.abs());
        if delta.abs() <= 15.0 * fr.tol.max(machine_floor) || fr.depth >= cfg.max_refinements {
            total += sl + sr + delta / 15.0;
            err_acc += delta.abs() / 15.0;
            if fr.depth >= cfg.max_refinements && delta.abs() > 15.0 * fr.tol {
                worst_residual = worst_residual.max(delta.abs());
            }
        } else {
            stack.push(Frame {
                a: fr.a,
                b: m,
                fa: fr.fa,
                fm: flm,
                fb: fr.fm,
                s: sl,
                tol: 0.5 * fr.tol,
                depth: fr.depth + 1,
            });
            stack.push(Frame {
                a: m,
                b: fr.b,
                fa: fr.fm,
                fm: frm,
                fb: fr.fb,
                s: sr,
                tol: 0.5 * fr.tol,
                depth: fr.depth + 1,
            });
        }
    }

    let final_tol = cfg.abs_tol.max(cfg.rel_tol * total.abs());
    if worst_residual > final_tol && err_acc > final_tol {
        return Err(Error::NoConvergence {
            what,
            residual: err_acc,
        });
    }
    Ok(Estimate {
        value: total,
        abs_error: err_acc.max(1e-16 * total.abs()),
    })
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre recurrence; accurate to
/// machine precision for the panel sizes used here (n <= 64).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by upward recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let pk = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = pk;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed quadrature rule stored as explicit nodes and weights.
///
/// Used where repeated evaluations must share identical abscissae so that
/// quadrature error cancels in finite differences, and so that expensive
/// factors can be cached per node.
#[derive(Debug, Clone)]
pub struct PanelRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl PanelRule {
    /// Composite Gauss-Legendre rule: `pts` points per panel over the given
    /// panel boundaries.
    pub fn composite(panel_edges: &[f64], pts: usize) -> Self {
        let (gx, gw) = gauss_legendre(pts);
        let mut nodes = Vec::with_capacity(pts * (panel_edges.len() - 1));
        let mut weights = Vec::with_capacity(nodes.capacity());
        for w in panel_edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let c = 0.5 * (lo + hi);
            let h = 0.5 * (hi - lo);
            for (x, wt) in gx.iter().zip(&gw) {
                nodes.push(c + h * x);
                weights.push(h * wt);
            }
        }
        PanelRule { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Composite Simpson over uniformly sampled values with spacing `dx`.
///
/// Odd interval counts fall back to a 3/8 closing rule so second-order
/// accuracy is kept regardless of parity.
pub fn simpson_uniform(values: &[f64], dx: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * dx * (values[0] + values[1]);
    }
    let intervals = n - 1;
    let (simpson_end, mut total) = if intervals.is_multiple_of(2) {
        (n - 1, 0.0)
    } else if n >= 4 {
        // Close with Simpson 3/8 on the last three intervals.
        let tail = 3.0 * dx / 8.0
            * (values[n - 4] + 3.0 * values[n - 3] + 3.0 * values[n - 2] + values[n - 1]);
        (n - 4, tail)
    } else {
        // Three points, odd count cannot happen (intervals == 2 is even).
        (n - 1, 0.0)
    };
    let mut i = 0;
    while i + 2 <= simpson_end {
        total += dx / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
        i += 2;
    }
    total
}

/// Cumulative trapezoid of `y` over abscissae `x`; result[0] = 0.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..x.len() {
        acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn adaptive_simpson_polynomial_is_exact() {
        let cfg = QuadratureConfig::default();
        let est = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, &cfg, "poly").unwrap();
        // integral = 4 - 4 + 2 = 2
        assert_relative_eq!(est.value, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn adaptive_simpson_peaked_integrand() {
        // A narrow Gaussian that a naive first bisection would miss.
        let cfg = QuadratureConfig::default();
        let sigma = 1e-3;
        let est = adaptive_simpson(
            |x: f64| (-((x - 0.37) / sigma).powi(2) / 2.0).exp(),
            0.0,
            1.0,
            &cfg,
            "gauss",
        )
        .unwrap();
        let exact = sigma * (2.0 * std::f64::consts::PI).sqrt();
        assert_relative_eq!(est.value, exact, max_relative = 1e-9);
    }

    #[test]
    fn adaptive_simpson_rejects_bad_interval() {
        let cfg = QuadratureConfig::default();
        assert!(adaptive_simpson(|x| x, 1.0, 0.0, &cfg, "rev").is_err());
    }

    #[test]
    fn gauss_legendre_integrates_high_degree() {
        // 16-point rule is exact through degree 31.
        let (x, w) = gauss_legendre(16);
        let val: f64 = x
            .iter()
            .zip(&w)
            .map(|(&xi, &wi)| wi * xi.powi(30))
            .sum();
        assert_relative_eq!(val, 2.0 / 31.0, max_relative = 1e-12);
    }

    #[test]
    fn composite_panels_match_adaptive() {
        let rule = PanelRule::composite(&[0.0, 0.5, 1.0, 2.0], 16);
        let val = rule.integrate(|x| (x * x).exp() * x.sin());
        let cfg = QuadratureConfig::default();
        let reference = adaptive_simpson(|x| (x * x).exp() * x.sin(), 0.0, 2.0, &cfg, "cmp")
            .unwrap()
            .value;
        assert_relative_eq!(val, reference, max_relative = 1e-10);
    }

    #[test]
    fn simpson_uniform_handles_odd_interval_count() {
        // f(x) = x^2 on [0, 1] with 4 points (3 intervals).
        let dx = 1.0 / 3.0;
        let vals: Vec<f64> = (0..4).map(|i| (i as f64 * dx).powi(2)).collect();
        assert_relative_eq!(simpson_uniform(&vals, dx), 1.0 / 3.0, max_relative = 1e-12);
        // and with 5 points (4 intervals)
        let dx = 0.25;
        let vals: Vec<f64> = (0..5).map(|i| (i as f64 * dx).powi(2)).collect();
        assert_relative_eq!(simpson_uniform(&vals, dx), 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn cumulative_trapezoid_linear() {
        let x: Vec<f64> = (0..11).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&t| 2.0 * t).collect();
        let c = cumulative_trapezoid(&x, &y);
        for (i, &xi) in x.iter().enumerate() {
            assert_relative_eq!(c[i], xi * xi, epsilon = 1e-12);
        }
    }
}
