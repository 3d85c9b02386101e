//! Command-line front end: evaluate special values, compute transition rows,
//! run the invariant suite, and run the stochastic cross-validation, emitting
//! CSV tables and JSON reports with the effective configuration embedded.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use qbd_core::bdkernel::{stationary_weight, transition_row};
use qbd_core::config::{parse_window_spec, RunConfig};
use qbd_core::ctmcsim::{empirical_vs_analytic, simulate_ensemble, SimConfig};
use qbd_core::decimal::format_real;
use qbd_core::qbessel::{delta_q, jnu_series};
use qbd_core::qcore::c_constant;
use qbd_core::qfourier::KernelMatrix;
use qbd_core::verify::{all_pass, run_all, VerifyConfig};

const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "qbd",
    version,
    about = "Bilateral birth-death kernels on the geometric grid via q-Bessel Fourier analysis"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate j_nu, delta_q, c_{q,nu}, or pi_n at given points
    Eval(EvalArgs),
    /// Compute the transition row p_{.r}(t) and write CSV
    Kernel(KernelArgs),
    /// Run the invariant suite and write a JSON report (exit 1 on failure)
    Verify(VerifyArgs),
    /// Simulate the chain and compare against the analytic row
    Simulate(SimulateArgs),
}

/// Flags shared by every subcommand; values override the config file.
#[derive(Args, Debug)]
struct CommonArgs {
    /// Grid ratio, 0 < q < 1
    #[arg(long)]
    q: Option<f64>,
    /// Order parameter, nu > -1
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    /// Working precision in bits (>= 64)
    #[arg(long = "precision-bits")]
    precision_bits: Option<u32>,
    /// Series/product truncation tolerance
    #[arg(long = "trunc-tol")]
    trunc_tol: Option<f64>,
    /// Grid window of exponents, LO:HI
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
    window: Option<String>,
    /// Config file (key-value with sections; flags override)
    #[arg(long)]
    config: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            cfg.apply_file(&text)?;
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(nu) = self.nu {
            cfg.nu = nu;
        }
        if let Some(p) = self.precision_bits {
            cfg.precision_bits = p;
        }
        if let Some(t) = self.trunc_tol {
            cfg.trunc_tol = t;
        }
        if let Some(w) = &self.window {
            let (lo, hi) = parse_window_spec(w)?;
            cfg.window_lo = lo;
            cfg.window_hi = hi;
            cfg.window_explicit = true;
        }
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Print c_{q,nu}
    #[arg(long = "c-constant")]
    c_constant: bool,
    /// Print the stationary weight pi_n at exponent N
    #[arg(long, value_name = "N", allow_hyphen_values = true)]
    pi: Option<i64>,
    /// Print j_nu(x, q^2) at real x > 0
    #[arg(long, value_name = "X")]
    jnu: Option<f64>,
    /// Print delta_q(q^I, q^J)
    #[arg(long, num_args = 2, value_names = ["I", "J"], allow_hyphen_values = true)]
    delta: Option<Vec<i64>>,
}

#[derive(Args, Debug)]
struct KernelArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Start exponent r (state q^r)
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    /// Time t >= 0
    #[arg(long)]
    t: Option<f64>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// First time of the Chapman-Kolmogorov split (default 0.5)
    #[arg(long)]
    t: Option<f64>,
    /// Second time of the Chapman-Kolmogorov split (default 0.5)
    #[arg(long)]
    s: Option<f64>,
    /// Output JSON path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Start exponent r
    #[arg(long, allow_hyphen_values = true)]
    r: Option<i64>,
    /// Simulation horizon (also the analytic comparison time)
    #[arg(long)]
    t: Option<f64>,
    /// Number of independent paths
    #[arg(long = "n-paths")]
    n_paths: Option<u64>,
    /// Master seed; path k derives its own stream from it
    #[arg(long)]
    seed: Option<u64>,
    /// Absorbing guard window, LO:HI
    #[arg(long, value_name = "LO:HI", allow_hyphen_values = true)]
    guard: Option<String>,
    /// Per-path event cap
    #[arg(long = "max-events")]
    max_events: Option<u64>,
    /// Output CSV path for the empirical-vs-analytic table
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output JSON path for the comparison report (stdout when omitted)
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Kernel(args) => cmd_kernel(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Simulate(args) => cmd_simulate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            // invalid input (domain validation, parse, io) exits 2
            ExitCode::from(2)
        }
    }
}

fn write_artifact(path: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.common.resolve()?;
    let params = cfg.params()?;
    let mut printed = 0;

    if args.c_constant {
        println!("{}", format_real(&c_constant(&params)));
        printed += 1;
    }
    if let Some(n) = args.pi {
        println!("{}", format_real(&stationary_weight(n, &params)));
        printed += 1;
    }
    if let Some(x) = args.jnu {
        println!("{}", format_real(&jnu_series(x, &params)?));
        printed += 1;
    }
    if let Some(ij) = &args.delta {
        println!("{}", format_real(&delta_q(ij[0], ij[1], &params)));
        printed += 1;
    }
    if printed == 0 {
        anyhow::bail!("nothing to evaluate: pass --c-constant, --pi, --jnu, or --delta");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_kernel(args: KernelArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = args.common.resolve()?;
    if let Some(r) = args.r {
        cfg.r = r;
    }
    if let Some(t) = args.t {
        cfg.t = t;
    }
    let params = cfg.params()?;
    let window = cfg.window()?;
    let matrix = KernelMatrix::build(window, &params)?;
    let row = transition_row(cfg.r, cfg.t, &matrix)?;

    let mut csv = cfg.csv_header(TOOL_VERSION);
    csv.push_str("n,x,p_nr,cumulative\n");
    let mut cumulative = params.real(0.0);
    for (n, p) in window.exponents().zip(row.probs()) {
        cumulative += p;
        let x = params.q_pow_i(n);
        let _ = writeln!(
            csv,
            "{n},{},{},{}",
            format_real(&x),
            format_real(p),
            format_real(&cumulative)
        );
    }
    write_artifact(args.out.as_deref(), &csv)?;
    eprintln!("row-sum defect = {}", format_real(row.defect()));
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    tool_version: &'a str,
    config: &'a RunConfig,
    spectral_window: String,
    kernel_window: String,
    differential_window: String,
    checks: Vec<qbd_core::verify::CheckResult>,
    all_pass: bool,
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let cfg = args.common.resolve()?;
    let params = cfg.params()?;
    // a window given explicitly is used for every check (an undersized one
    // makes checks fail); otherwise adequate windows are computed
    let mut vcfg = if cfg.window_explicit {
        VerifyConfig::with_window(params, cfg.window()?)
    } else {
        VerifyConfig::standard(params)?
    };
    if let Some(t) = args.t {
        vcfg.ck_split.0 = t;
    }
    if let Some(s) = args.s {
        vcfg.ck_split.1 = s;
    }
    let checks = run_all(&vcfg)?;
    let ok = all_pass(&checks);
    let report = VerifyReport {
        tool_version: TOOL_VERSION,
        config: &cfg,
        spectral_window: vcfg.spectral.to_string(),
        kernel_window: vcfg.kernel.to_string(),
        differential_window: vcfg.differential.to_string(),
        checks,
        all_pass: ok,
    };
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_artifact(args.out.as_deref(), &json)?;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    tool_version: &'a str,
    config: &'a RunConfig,
    tv: f64,
    threshold: f64,
    k_states: usize,
    z_max: f64,
    pass: bool,
    n_valid: u64,
    n_guard: u64,
    n_maxed: u64,
    seed: u64,
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = args.common.resolve()?;
    if let Some(r) = args.r {
        cfg.r = r;
    }
    if let Some(t) = args.t {
        cfg.t_end = t;
    }
    if let Some(n) = args.n_paths {
        cfg.n_paths = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(g) = &args.guard {
        let (lo, hi) = parse_window_spec(g)?;
        cfg.guard_lo = lo;
        cfg.guard_hi = hi;
    }
    if let Some(m) = args.max_events {
        cfg.max_events = m;
    }

    let params = cfg.params()?;
    let window = cfg.window()?;
    let sim_cfg = SimConfig {
        params,
        start: cfg.r,
        t_end: cfg.t_end,
        n_paths: cfg.n_paths,
        seed: cfg.seed,
        guard: cfg.guard()?,
        max_events: cfg.max_events,
    };
    sim_cfg.validate()?;

    let stats = simulate_ensemble(&sim_cfg)?;
    if stats.excluded_mass_suspicious() {
        eprintln!(
            "warning: {} of {} paths excluded (guard {} / max-events {}); results unreliable",
            stats.n_guard + stats.n_maxed,
            stats.n_paths,
            stats.n_guard,
            stats.n_maxed
        );
    }
    let matrix = KernelMatrix::build(window, &params)?;
    let row = transition_row(cfg.r, cfg.t_end, &matrix)?;
    let report = empirical_vs_analytic(&stats, &row)?;

    let mut csv = cfg.csv_header(TOOL_VERSION);
    csv.push_str("n,empirical,analytic,z\n");
    let n_valid = stats.n_valid as f64;
    for (n, p) in window.exponents().zip(row.probs()) {
        let emp = stats.counts.get(&n).copied().unwrap_or(0) as f64 / n_valid;
        let z = report
            .z_scores
            .iter()
            .find(|&&(i, _)| i == n)
            .map(|&(_, z)| format!("{z:e}"))
            .unwrap_or_default();
        let _ = writeln!(csv, "{n},{emp:e},{},{z}", format_real(p));
    }
    if args.out.is_some() {
        write_artifact(args.out.as_deref(), &csv)?;
    }

    let json_report = SimulateReport {
        tool_version: TOOL_VERSION,
        config: &cfg,
        tv: report.tv,
        threshold: report.threshold,
        k_states: report.k_states,
        z_max: report.z_max,
        pass: report.pass,
        n_valid: stats.n_valid,
        n_guard: stats.n_guard,
        n_maxed: stats.n_maxed,
        seed: cfg.seed,
    };
    let mut json = serde_json::to_string_pretty(&json_report)?;
    json.push('\n');
    write_artifact(args.report.as_deref(), &json)?;

    let ok = report.pass && !stats.excluded_mass_suspicious();
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
