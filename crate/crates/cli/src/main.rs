//! Unified command-line front end for the damped-wave blow-up laboratory.
//!
//! Exit codes: 0 success, 1 domain/runtime errors, 2 usage errors.

// NaN-rejecting validation guards, as in the core crate
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use strausslab_core::exponents::{self, strauss_exponent};
use strausslab_core::functional_chain::{
    check_g1_chain, check_ineq, check_key_inequality, dropped_boundary_term,
    fitted_lower_bound_constant, g_functional, lp_slope, quadratic_seed_coefficient,
    triple_integration_identity, DataPair,
};
use strausslab_core::ode_comparison::{
    comparison_integrate, riccati_blowup_time, riccati_integrate_numeric, ComparisonProblem,
    RiccatiSpec,
};
use strausslab_core::pde_solver::{fit_scaling, run, sweep, FitMode, RunStatus, SolverConfig};
use strausslab_core::special::{bessel_k, gauss_2f1};
use strausslab_core::test_functions::{
    b_q, classify_regime, estimate_onset_time, TestFunctionSpec,
};
use strausslab_core::{ModelParams, QuadratureConfig};

use config::{resolve, FileConfig};
use output::{fmt_f64, Emitter};

#[derive(Parser)]
#[command(
    name = "strausslab",
    about = "Numerical laboratory for blow-up of the scale-invariant damped wave equation",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Write CSV results to this path instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress log lines.
    #[arg(long, global = true)]
    quiet: bool,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Key-value config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Spatial dimension n.
    #[arg(long)]
    n: Option<u32>,
    /// Damping coefficient mu.
    #[arg(long)]
    mu: Option<f64>,
    /// Nonlinearity exponent p, or the literal `critical` for p_S(n+mu).
    #[arg(long)]
    p: Option<String>,
    /// Data amplitude epsilon.
    #[arg(long)]
    eps: Option<f64>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Radial grid spacing.
    #[arg(long)]
    dr: Option<f64>,
    /// Courant number (dt = cfl * dr).
    #[arg(long)]
    cfl: Option<f64>,
    /// Simulation time cutoff.
    #[arg(long)]
    tmax: Option<f64>,
    /// Domain radius (default: tmax + 1/2 + 4 dr).
    #[arg(long)]
    rmax: Option<f64>,
    /// Blow-up threshold on sup|u|.
    #[arg(long)]
    threshold: Option<f64>,
    /// Keep a field snapshot every k steps (0 = none).
    #[arg(long)]
    snapshot_every: Option<u64>,
    /// Disable the |u|^p source (linear runs).
    #[arg(long)]
    linear: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exponent algebra and admissibility for one parameter set.
    #[command(allow_negative_numbers = true)]
    CheckExponents(ModelArgs),
    /// Evaluate K_nu(t) from the defining integral.
    #[command(allow_negative_numbers = true)]
    EvalBessel {
        #[arg(long)]
        nu: f64,
        #[arg(long)]
        t: f64,
    },
    /// Evaluate the Gauss hypergeometric function from the Euler integral.
    #[command(name = "eval-2f1")]
    #[command(allow_negative_numbers = true)]
    Eval2f1 {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        z: f64,
    },
    /// Evaluate the test function b_q at one point.
    #[command(allow_negative_numbers = true)]
    EvalTestfn {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        mu: Option<f64>,
        /// Order parameter (default: the critical q for (n, mu)).
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        t: f64,
    },
    /// Scan b_q against its large-time profile and estimate the onset time.
    #[command(allow_negative_numbers = true)]
    VerifyAsymptotics {
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
        /// Scan along r = r_frac * t.
        #[arg(long, default_value_t = 0.0)]
        r_frac: f64,
    },
    /// Re-run a recorded simulation and check the functional-inequality chain.
    VerifyChain {
        /// Per-run CSV produced by `simulate` (carries its config).
        #[arg(long)]
        run: PathBuf,
    },
    /// Integrate a two-member comparison problem from a config file.
    CompareOde,
    /// Riccati barrier: closed-form blow-up time plus numeric confirmation.
    #[command(allow_negative_numbers = true)]
    Riccati {
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        s0: Option<f64>,
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// One solver run; per-step CSV of (t, sup|u|, int |u|^p dx).
    #[command(allow_negative_numbers = true)]
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Independent runs over an epsilon list; CSV of (epsilon, T, status).
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Comma-separated epsilon values.
        #[arg(long, value_delimiter = ',')]
        eps_list: Vec<f64>,
        /// critical | subcritical
        #[arg(long)]
        mode: Option<String>,
    },
    /// Least-squares lifespan fit from a sweep CSV.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// critical | subcritical (default: the mode recorded in the file).
        #[arg(long)]
        mode: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .ok();
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn parse_p(raw: Option<&str>, file: &FileConfig, n: u32, mu: f64) -> Result<f64> {
    let source = match raw {
        Some(s) => Some(s.to_string()),
        None => file.get_str("model.p").map(|s| s.to_string()),
    };
    match source.as_deref() {
        None | Some("critical") => Ok(strauss_exponent(n as f64 + mu)?),
        Some(text) => text
            .parse::<f64>()
            .with_context(|| format!("--p expects a number or `critical`, got {text:?}")),
    }
}

fn resolve_model(args: &ModelArgs, file: &FileConfig) -> Result<ModelParams> {
    let n = resolve(args.n, file.get_u64("model.n")?.map(|v| v as u32), 2);
    let mu = resolve(args.mu, file.get_f64("model.mu")?, 1.0);
    let p = parse_p(args.p.as_deref(), file, n, mu)?;
    let eps = resolve(args.eps, file.get_f64("model.eps")?, 1.0);
    Ok(ModelParams::new(n, mu, p, eps)?)
}

fn resolve_solver(args: &SolverArgs, file: &FileConfig, n: u32) -> Result<SolverConfig> {
    // origin row carries sqrt(n): keep the default comfortably inside
    let default_cfl = (0.85 / (n as f64).sqrt()).min(0.6);
    let dr = resolve(args.dr, file.get_f64("solver.dr")?, 0.05);
    let cfl = resolve(args.cfl, file.get_f64("solver.cfl")?, default_cfl);
    let t_max = resolve(args.tmax, file.get_f64("solver.tmax")?, 20.0);
    let mut cfg = SolverConfig::new(dr, cfl, t_max)?;
    if let Some(rmax) = args.rmax.or(file.get_f64("solver.rmax")?) {
        cfg.r_max = rmax;
    }
    cfg.blowup_threshold = resolve(args.threshold, file.get_f64("solver.threshold")?, 1e8);
    cfg.snapshot_every =
        resolve(args.snapshot_every, file.get_u64("solver.snapshot-every")?, 0) as usize;
    cfg.nonlinear = !(args.linear
        || file
            .get_str("solver.linear")
            .map(|v| v == "true" || v == "1")
            .unwrap_or(false));
    cfg.validate()?;
    Ok(cfg)
}

fn echo_model(emit: &mut Emitter, params: &ModelParams) {
    emit.config_line("model.n", params.n.to_string());
    emit.config_line("model.mu", fmt_f64(params.mu));
    emit.config_line("model.p", fmt_f64(params.p));
    emit.config_line("model.eps", fmt_f64(params.epsilon));
}

fn echo_solver(emit: &mut Emitter, cfg: &SolverConfig) {
    emit.config_line("solver.dr", fmt_f64(cfg.dr));
    emit.config_line("solver.cfl", fmt_f64(cfg.cfl));
    emit.config_line("solver.rmax", fmt_f64(cfg.r_max));
    emit.config_line("solver.threshold", fmt_f64(cfg.blowup_threshold));
    emit.config_line("solver.tmax", fmt_f64(cfg.t_max));
    emit.config_line("solver.snapshot-every", cfg.snapshot_every.to_string());
    emit.config_line("solver.linear", (!cfg.nonlinear).to_string());
    emit.config_line("data.profile", "standard-bump");
}

fn status_str(s: RunStatus) -> &'static str {
    match s {
        RunStatus::BlewUp => "blew_up",
        RunStatus::Censored => "censored",
        RunStatus::Unstable => "unstable",
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let mut emit = Emitter::new(cli.out.clone(), cli.quiet);
    let quad = QuadratureConfig::default();

    match cli.command {
        Command::CheckExponents(model) => {
            let n = resolve(model.n, file.get_u64("model.n")?.map(|v| v as u32), 2);
            let mu = resolve(model.mu, file.get_f64("model.mu")?, 1.0);
            let p = parse_p(model.p.as_deref(), &file, n, mu)?;
            let eps = resolve(model.eps, file.get_f64("model.eps")?, 1.0);
            let params = ModelParams::new(n, mu, p, eps)?;
            echo_model(&mut emit, &params);
            let verdict = exponents::check_admissible(&params);
            let rep = &verdict.report;
            emit.csv_header(&["quantity", "value"]);
            for (name, value) in [
                ("p_strauss", rep.p_strauss),
                ("p_fujita", rep.p_fujita),
                ("mu_star", rep.mu_star),
                ("gamma_value", rep.gamma_value),
                ("q_value", rep.q_value),
                ("p_conjugate", rep.p_conjugate),
            ] {
                emit.csv_row(&[name.to_string(), fmt_f64(value)]);
            }
            emit.csv_row(&[
                "admissible".to_string(),
                (verdict.admissible() as u8).to_string(),
            ]);
            for v in &verdict.violations {
                emit.log(&format!("violation: {v}"));
            }
            emit.finish()
        }

        Command::EvalBessel { nu, t } => {
            emit.config_line("bessel.nu", fmt_f64(nu));
            emit.config_line("bessel.t", fmt_f64(t));
            let eval = bessel_k(nu, t, &quad)?;
            emit.csv_header(&["nu", "t", "value", "est_abs_error"]);
            emit.csv_row(&[
                fmt_f64(nu),
                fmt_f64(t),
                fmt_f64(eval.value),
                fmt_f64(eval.est_abs_error),
            ]);
            emit.log(&format!("K_{nu}({t}) = {} (+/- {:.3e})", eval.value, eval.est_abs_error));
            emit.finish()
        }

        Command::Eval2f1 {
            alpha,
            beta,
            gamma,
            z,
        } => {
            emit.config_line("hyp2f1.alpha", fmt_f64(alpha));
            emit.config_line("hyp2f1.beta", fmt_f64(beta));
            emit.config_line("hyp2f1.gamma", fmt_f64(gamma));
            emit.config_line("hyp2f1.z", fmt_f64(z));
            let eval = gauss_2f1(alpha, beta, gamma, z, &quad)?;
            if eval.near_singular {
                emit.log("warning: z approaches 1 with alpha + beta >= gamma; value near-singular");
            }
            emit.csv_header(&["alpha", "beta", "gamma", "z", "value", "est_abs_error", "near_singular"]);
            emit.csv_row(&[
                fmt_f64(alpha),
                fmt_f64(beta),
                fmt_f64(gamma),
                fmt_f64(z),
                fmt_f64(eval.value),
                fmt_f64(eval.est_abs_error),
                (eval.near_singular as u8).to_string(),
            ]);
            emit.log(&format!("F({alpha},{beta},{gamma};{z}) = {}", eval.value));
            emit.finish()
        }

        Command::EvalTestfn { n, mu, q, r, t } => {
            let n = resolve(n, file.get_u64("model.n")?.map(|v| v as u32), 2);
            let mu = resolve(mu, file.get_f64("model.mu")?, 1.0);
            let spec = match q.or(file.get_f64("testfn.q")?) {
                Some(q) => TestFunctionSpec::new(n, mu, q)?,
                None => TestFunctionSpec::critical(n, mu)?,
            };
            emit.config_line("testfn.n", n.to_string());
            emit.config_line("testfn.mu", fmt_f64(mu));
            emit.config_line("testfn.q", fmt_f64(spec.q));
            let value = b_q(&spec, r, t)?;
            emit.csv_header(&["n", "mu", "q", "r", "t", "b_q"]);
            emit.csv_row(&[
                n.to_string(),
                fmt_f64(mu),
                fmt_f64(spec.q),
                fmt_f64(r),
                fmt_f64(t),
                fmt_f64(value),
            ]);
            emit.log(&format!("b_q({r}, {t}) = {value}"));
            emit.finish()
        }

        Command::VerifyAsymptotics { n, mu, q, r_frac } => {
            let n = resolve(n, file.get_u64("model.n")?.map(|v| v as u32), 2);
            let mu = resolve(mu, file.get_f64("model.mu")?, 1.0);
            let spec = match q.or(file.get_f64("testfn.q")?) {
                Some(q) => TestFunctionSpec::new(n, mu, q)?,
                None => TestFunctionSpec::critical(n, mu)?,
            };
            emit.config_line("testfn.n", n.to_string());
            emit.config_line("testfn.mu", fmt_f64(mu));
            emit.config_line("testfn.q", fmt_f64(spec.q));
            emit.config_line("testfn.r-frac", fmt_f64(r_frac));
            let regime = classify_regime(&spec)?;
            emit.log(&format!("profile regime: {:?}, exponents {:?}", regime.regime, regime.exponents));
            let times = [20.0, 35.0, 50.0, 75.0, 100.0, 150.0, 200.0, 300.0, 400.0];
            let scan = estimate_onset_time(&spec, &times, r_frac)?;
            emit.csv_header(&["t", "r", "b_q", "profile", "ratio"]);
            for (t, r, b, prof, ratio) in &scan.samples {
                emit.csv_row(&[
                    fmt_f64(*t),
                    fmt_f64(*r),
                    fmt_f64(*b),
                    fmt_f64(*prof),
                    fmt_f64(*ratio),
                ]);
            }
            match scan.t0 {
                Some(t0) => emit.log(&format!("estimated onset time T0 = {t0} (ratio variation < 20% beyond)")),
                None => emit.log("ratio did not settle within the scanned window"),
            }
            emit.finish()
        }

        Command::VerifyChain { run: run_path } => verify_chain(&run_path, emit, &quad),

        Command::CompareOde => {
            if cli.config.is_none() {
                bail!("compare-ode requires --config <file> describing the problem");
            }
            compare_ode(&file, emit)
        }

        Command::Riccati { delta, s0, c0, p } => {
            let delta = resolve(delta, file.get_f64("riccati.delta")?, 0.01);
            let s0 = resolve(s0, file.get_f64("riccati.s0")?, 1.0);
            let c0 = resolve(c0, file.get_f64("riccati.c0")?, 1.0);
            let p = resolve(p, file.get_f64("riccati.p")?, 2.0);
            let spec = RiccatiSpec::new(delta, s0, c0, p)?;
            emit.config_line("riccati.delta", fmt_f64(delta));
            emit.config_line("riccati.s0", fmt_f64(s0));
            emit.config_line("riccati.c0", fmt_f64(c0));
            emit.config_line("riccati.p", fmt_f64(p));
            let s_star = riccati_blowup_time(&spec);
            let s_num = riccati_integrate_numeric(&spec, 1e10);
            if !spec.ordering_ok() {
                emit.log("note: parameters violate c0 << s0 << 1/delta; the subsolution construction would refuse them");
            }
            emit.csv_header(&["quantity", "value"]);
            emit.csv_row(&["s_star_closed_form".into(), fmt_f64(s_star)]);
            emit.csv_row(&["s_blowup_numeric".into(), fmt_f64(s_num)]);
            emit.csv_row(&["h3_init".into(), fmt_f64(spec.h3_init())]);
            emit.csv_row(&["ordering_ok".into(), (spec.ordering_ok() as u8).to_string()]);
            emit.log(&format!(
                "s* = {s_star} (closed form), numeric crossing of 1e10 at s = {s_num} ({:+.3}%)",
                100.0 * (s_num - s_star) / s_star
            ));
            emit.finish()
        }

        Command::Simulate { model, solver } => {
            let params = resolve_model(&model, &file)?;
            let cfg = resolve_solver(&solver, &file, params.n)?;
            echo_model(&mut emit, &params);
            echo_solver(&mut emit, &cfg);
            let (trace, est) = run(&params, &DataPair::default_bump(), &cfg)?;
            emit.csv_header(&["t", "sup_abs", "lp_integral"]);
            for ((t, sup), lp) in trace
                .times
                .iter()
                .zip(&trace.sup_abs)
                .zip(&trace.lp_integral)
            {
                emit.csv_row(&[fmt_f64(*t), fmt_f64(*sup), fmt_f64(*lp)]);
            }
            emit.log(&format!(
                "status {} at T = {} (max amplitude {:.3e})",
                status_str(est.status),
                est.t_blowup,
                est.max_amplitude
            ));
            emit.finish()
        }

        Command::Sweep {
            model,
            solver,
            mut eps_list,
            mode,
        } => {
            if eps_list.is_empty() {
                bail!("--eps-list must contain at least one value");
            }
            eps_list.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let params = resolve_model(&model, &file)?;
            let cfg = resolve_solver(&solver, &file, params.n)?;
            let mode = mode
                .or(file.get_str("sweep.mode").map(|s| s.to_string()))
                .unwrap_or_else(|| "critical".to_string());
            parse_mode(&mode)?; // validated now, recorded for fit
            echo_model(&mut emit, &params);
            echo_solver(&mut emit, &cfg);
            emit.config_line("sweep.mode", &mode);
            emit.config_line(
                "sweep.eps-list",
                eps_list
                    .iter()
                    .map(|e| fmt_f64(*e))
                    .collect::<Vec<_>>()
                    .join(";"),
            );
            let results = sweep(&params, &eps_list, &DataPair::default_bump(), &cfg)?;
            emit.csv_header(&["epsilon", "t_blowup", "status"]);
            for r in &results {
                emit.csv_row(&[
                    fmt_f64(r.epsilon),
                    fmt_f64(r.t_blowup),
                    status_str(r.status).to_string(),
                ]);
            }
            let censored = results.iter().filter(|r| r.status != RunStatus::BlewUp).count();
            emit.log(&format!(
                "{} runs, {} censored/unstable (epsilon window [{}, {}])",
                results.len(),
                censored,
                eps_list.first().unwrap(),
                eps_list.last().unwrap()
            ));
            emit.finish()
        }

        Command::Fit { input, mode } => fit_command(&input, mode, emit),
    }
}

fn parse_mode(mode: &str) -> Result<FitMode> {
    match mode {
        "critical" => Ok(FitMode::Critical),
        "subcritical" => Ok(FitMode::Subcritical),
        other => bail!("mode must be `critical` or `subcritical`, got {other:?}"),
    }
}

type ParsedCsv = (BTreeMap<String, String>, Vec<String>, Vec<Vec<String>>);

/// Parse a CSV produced by this binary: `# config k=v` comments, one
/// header row, data rows.
fn read_csv(path: &Path) -> Result<ParsedCsv> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut config = BTreeMap::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("# config ") {
            if let Some((k, v)) = rest.split_once('=') {
                config.insert(k.trim().to_string(), v.trim().to_string());
            }
            continue;
        }
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
        if header.is_none() {
            header = Some(fields);
        } else {
            rows.push(fields);
        }
    }
    Ok((
        config,
        header.ok_or_else(|| anyhow!("{}: no header row", path.display()))?,
        rows,
    ))
}

fn cfg_f64(map: &BTreeMap<String, String>, key: &str) -> Result<f64> {
    map.get(key)
        .ok_or_else(|| anyhow!("input file lacks `# config {key}=`"))?
        .parse::<f64>()
        .with_context(|| format!("bad value for {key}"))
}

fn fit_command(input: &Path, mode: Option<String>, mut emit: Emitter) -> Result<()> {
    let (config, header, rows) = read_csv(input)?;
    if header != ["epsilon", "t_blowup", "status"] {
        bail!("{}: not a sweep CSV (header {header:?})", input.display());
    }
    let n = cfg_f64(&config, "model.n")? as u32;
    let mu = cfg_f64(&config, "model.mu")?;
    let p = cfg_f64(&config, "model.p")?;
    let params = ModelParams::new(n, mu, p, 1.0)?;
    let mode_str = mode
        .or_else(|| config.get("sweep.mode").cloned())
        .ok_or_else(|| anyhow!("no --mode given and none recorded in the file"))?;
    let mode = parse_mode(&mode_str)?;

    let mut results = Vec::new();
    for row in &rows {
        if row.len() != 3 {
            bail!("malformed sweep row {row:?}");
        }
        let status = match row[2].as_str() {
            "blew_up" => RunStatus::BlewUp,
            "censored" => RunStatus::Censored,
            "unstable" => RunStatus::Unstable,
            other => bail!("unknown status {other:?}"),
        };
        results.push(strausslab_core::LifespanEstimate {
            epsilon: row[0].parse()?,
            t_blowup: row[1].parse()?,
            max_amplitude: f64::NAN,
            status,
        });
    }
    let fit = fit_scaling(&results, mode, &params)?;
    emit.config_line("fit.input", input.display().to_string());
    emit.config_line("fit.mode", &mode_str);
    if mode == FitMode::Subcritical {
        let target = -2.0 * p * (p - 1.0)
            / exponents::gamma_quadratic(p, n as f64 + mu);
        emit.log(&format!("predicted subcritical slope -2p(p-1)/gamma = {target}"));
    }
    let json = format!(
        "{{\"mode\": \"{mode_str}\", \"slope\": {}, \"intercept\": {}, \"r_squared\": {}, \"n_used\": {}, \"n_censored\": {}, \"transformed_x\": \"{}\"}}\n",
        fmt_f64(fit.slope),
        fmt_f64(fit.intercept),
        fmt_f64(fit.r_squared),
        fit.n_used,
        fit.n_censored,
        fit.transformed_x
    );
    emit.csv_raw(&json);
    emit.log(&format!(
        "fit: slope {} intercept {} r^2 {:.6} ({} used, {} censored)",
        fit.slope, fit.intercept, fit.r_squared, fit.n_used, fit.n_censored
    ));
    emit.finish()
}

fn verify_chain(run_path: &Path, mut emit: Emitter, quad: &QuadratureConfig) -> Result<()> {
    let (config, header, _) = read_csv(run_path)?;
    if header != ["t", "sup_abs", "lp_integral"] {
        bail!("{}: not a simulate CSV (header {header:?})", run_path.display());
    }
    let n = cfg_f64(&config, "model.n")? as u32;
    let mu = cfg_f64(&config, "model.mu")?;
    let p = cfg_f64(&config, "model.p")?;
    let eps = cfg_f64(&config, "model.eps")?;
    let params = ModelParams::new(n, mu, p, eps)?;
    let mut cfg = SolverConfig::new(cfg_f64(&config, "solver.dr")?, cfg_f64(&config, "solver.cfl")?, cfg_f64(&config, "solver.tmax")?)?;
    cfg.r_max = cfg_f64(&config, "solver.rmax")?;
    cfg.blowup_threshold = cfg_f64(&config, "solver.threshold")?;
    // the functionals need snapshots; densify if the run kept none
    let recorded = cfg_f64(&config, "solver.snapshot-every").unwrap_or(0.0) as usize;
    cfg.snapshot_every = if recorded > 0 { recorded } else { 2 };
    emit.log(&format!(
        "re-running {} deterministically with snapshots every {} steps",
        run_path.display(),
        cfg.snapshot_every
    ));
    echo_model(&mut emit, &params);
    echo_solver(&mut emit, &cfg);

    let data = DataPair::default_bump();
    let (full_trace, est) = run(&params, &data, &cfg)?;
    emit.log(&format!("status {} at T = {}", status_str(est.status), est.t_blowup));
    let trace = full_trace.pre_blowup_window(10.0);
    let spec = TestFunctionSpec::critical(n, mu)?;
    let ftrace = g_functional(&trace, &spec)?;

    let mut report: Vec<(String, f64, bool)> = Vec::new();

    let samples = check_ineq(&ftrace);
    let worst_ineq = samples
        .iter()
        .map(|s| (s.lhs - s.rhs) / s.rhs.abs().max(1e-300))
        .fold(f64::MIN, f64::max);
    report.push(("ineq_worst_margin".into(), worst_ineq, worst_ineq <= 1e-9));

    let (lhs, rhs) = triple_integration_identity(&ftrace);
    let triple_err = ((lhs - rhs) / rhs).abs();
    report.push(("triple_identity_rel_err".into(), triple_err, triple_err < 0.01));

    match check_key_inequality(&ftrace, p) {
        Ok(key) => report.push((
            "key_ratio_inf".into(),
            key.k_inf,
            key.all_positive && key.k_inf > 0.0,
        )),
        Err(err) => {
            emit.log(&format!("key inequality window unavailable: {err}"));
            report.push(("key_ratio_inf".into(), f64::NAN, false));
        }
    }

    let t_end = *ftrace.times.last().unwrap();
    match quadratic_seed_coefficient(&ftrace, t_end / 2.0) {
        Ok(c2) => report.push(("quadratic_seed_coeff".into(), c2, c2 > 0.0)),
        Err(err) => {
            emit.log(&format!("quadratic seed unavailable: {err}"));
            report.push(("quadratic_seed_coeff".into(), f64::NAN, false));
        }
    }

    let g1 = check_g1_chain(&ftrace, &data, &params, quad)?;
    report.push(("c_fg".into(), g1.c_fg, g1.c_fg > 0.0));
    report.push((
        "g1_initial_bracket".into(),
        g1.initial_bracket,
        g1.initial_bracket > 0.0,
    ));
    report.push((
        "g1_residual_min_rel".into(),
        g1.min_residual_rel,
        g1.min_residual_rel > -1e-6,
    ));
    report.push((
        "g1_bound_gap_min_rel".into(),
        g1.min_bound_gap_rel,
        g1.min_bound_gap_rel > -1e-6,
    ));

    let boundary = dropped_boundary_term(&data, &spec)?;
    report.push(("dropped_boundary_term".into(), boundary, boundary > 0.0));

    if est.status == RunStatus::BlewUp {
        let window = (1.0, 0.9 * est.t_blowup);
        if let Ok(c) = fitted_lower_bound_constant(&trace, &params, window) {
            report.push(("lp_lower_bound_constant".into(), c, c > 0.0));
        }
        if let Ok(slope) = lp_slope(&trace, window) {
            let predicted = n as f64 - 1.0 - (n as f64 + mu - 1.0) * p / 2.0;
            report.push((
                "lp_slope_margin".into(),
                slope - predicted,
                slope >= predicted - 0.2,
            ));
        }
    }

    emit.csv_header(&["check", "value", "passed"]);
    for (name, value, passed) in report {
        emit.csv_row(&[name, fmt_f64(value), (passed as u8).to_string()]);
    }
    emit.finish()
}

fn parse_coefficient(expr: &str) -> Result<strausslab_core::ode_comparison::Coefficient> {
    use std::sync::Arc;
    if let Some(v) = expr.strip_prefix("const:") {
        let v: f64 = v.parse()?;
        // NaN fails this too
        if !(v > 0.0) {
            bail!("constant coefficient must be positive, got {v}");
        }
        return Ok(Arc::new(move |_| v));
    }
    if let Some(rest) = expr.strip_prefix("affine:") {
        let (a0, a1) = rest
            .split_once(',')
            .ok_or_else(|| anyhow!("affine coefficient needs `a0,a1`"))?;
        let a0: f64 = a0.parse()?;
        let a1: f64 = a1.parse()?;
        return Ok(Arc::new(move |t| a0 + a1 * t));
    }
    if let Some(c) = expr.strip_prefix("inv-time:") {
        let c: f64 = c.parse()?;
        return Ok(Arc::new(move |t| c / (1.0 + t)));
    }
    bail!("coefficient expressions: const:<v>, affine:<a0>,<a1>, inv-time:<c>; got {expr:?}")
}

fn compare_ode(file: &FileConfig, mut emit: Emitter) -> Result<()> {
    let alpha = file.get_f64("compare.alpha")?.unwrap_or(1.0);
    let a_expr = file.get_str("compare.a").unwrap_or("const:1.0").to_string();
    let b_expr = file.get_str("compare.b").unwrap_or("const:1.0").to_string();
    let prob = ComparisonProblem {
        coeff_a: parse_coefficient(&a_expr)?,
        coeff_b: parse_coefficient(&b_expr)?,
        alpha,
        k_init: (
            file.get_f64("compare.k0")?.unwrap_or(2.0),
            file.get_f64("compare.k0-prime")?.unwrap_or(0.0),
        ),
        h_init: (
            file.get_f64("compare.h0")?.unwrap_or(1.0),
            file.get_f64("compare.h0-prime")?.unwrap_or(0.0),
        ),
    };
    let t_end = file.get_f64("compare.t-end")?.unwrap_or(10.0);
    let step = file.get_f64("compare.step")?.unwrap_or(1e-4);
    emit.config_line("compare.alpha", fmt_f64(alpha));
    emit.config_line("compare.a", &a_expr);
    emit.config_line("compare.b", &b_expr);
    emit.config_line("compare.k0", fmt_f64(prob.k_init.0));
    emit.config_line("compare.k0-prime", fmt_f64(prob.k_init.1));
    emit.config_line("compare.h0", fmt_f64(prob.h_init.0));
    emit.config_line("compare.h0-prime", fmt_f64(prob.h_init.1));
    emit.config_line("compare.t-end", fmt_f64(t_end));
    emit.config_line("compare.step", fmt_f64(step));

    let verdict = comparison_integrate(&prob, t_end, step)?;
    emit.csv_header(&["t", "k", "k_prime", "h", "h_prime"]);
    for (t, k, kp, h, hp) in &verdict.trace {
        emit.csv_row(&[fmt_f64(*t), fmt_f64(*k), fmt_f64(*kp), fmt_f64(*h), fmt_f64(*hp)]);
    }
    emit.log(&format!(
        "ordering held: {}; K blow-up: {:?}; h blow-up: {:?}; reached t = {}",
        verdict.ordering_held, verdict.k_blowup, verdict.h_blowup, verdict.t_reached
    ));
    if let Some(t) = verdict.first_violation {
        emit.log(&format!("first ordering violation at t = {t}"));
    }
    emit.finish()
}
