//! `fbq`: busy-period maximum queue lengths in the M/G/1 queue under the
//! Foreground-Background discipline. Analytic tail bounds, buffer-overflow
//! quantiles, and a deterministic FB/FB*/FIFO simulator.

mod config;
mod output;
mod paper;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use fbq_core::analytics::{self, BoundKind};
use fbq_core::sim::{
    self, CoupledOptions, Discipline, EstimateOptions, QueueParams, RunOptions, StreamPair,
};
use fbq_core::{Error, ServiceDistribution};

use config::ExperimentConfig;
use output::{bounds_csv, bounds_json, emit, json_meta};

#[derive(Parser)]
#[command(name = "fbq", version, about, disable_help_subcommand = true)]
struct Cli {
    /// Config file with key=value defaults; flags override.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Base RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (stdout when omitted) or, for `paper`, output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Worker threads; affects speed only, never results.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-level tail bounds for a stable queue (CSV), optionally with a
    /// simulated estimate alongside.
    Bounds(BoundsArgs),
    /// Busy-cycle simulation: empirical exceedance probabilities with 95%
    /// confidence intervals.
    Simulate(SimulateArgs),
    /// Buffer-overflow quantile under the selected bound, with the FIFO
    /// single-giant-job heuristic alongside (JSON).
    Overflow(OverflowArgs),
    /// Coupled pair of FB queues sharing arrivals and service uniforms;
    /// verifies the pathwise domination relations (JSON).
    Couple(CoupleArgs),
    /// Regenerates the full analytic/simulation result set with fixed
    /// seeds and self-checks; writes artifacts and a manifest.
    Paper(PaperArgs),
}

#[derive(Args)]
struct BoundsArgs {
    /// Distribution spec, e.g. `pareto:alpha=4`.
    #[arg(long)]
    dist: Option<String>,
    /// Arrival rate (1/ms).
    #[arg(long)]
    lambda: Option<f64>,
    /// Largest level n.
    #[arg(long)]
    nmax: Option<u32>,
    /// Also simulate this many busy cycles for the empirical columns.
    #[arg(long)]
    cycles: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// fb | fbstar | fifo.
    #[arg(long)]
    discipline: Option<String>,
    #[arg(long)]
    cycles: Option<u64>,
    #[arg(long)]
    nmax: Option<u32>,
    /// Accept rho >= 1 (event cap becomes the only stop).
    #[arg(long)]
    allow_unstable: bool,
    /// Write the first replication's event trace (`clock,event_kind,queue_len`
    /// lines) to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct OverflowArgs {
    #[arg(long)]
    dist: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Buffer size.
    #[arg(long)]
    d: Option<u32>,
    /// Risk level in (0,1).
    #[arg(long)]
    p: Option<f64>,
    /// rho_pow | q_sequence | exact_mm1.
    #[arg(long)]
    bound: Option<String>,
    /// FIFO heuristic threshold inflation (default 3).
    #[arg(long)]
    sigma_mult: Option<f64>,
}

#[derive(Args)]
struct CoupleArgs {
    #[arg(long)]
    dist_f: Option<String>,
    #[arg(long)]
    dist_g: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    p_splice: Option<f64>,
    /// Horizon (ms).
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    paths: Option<u64>,
}

#[derive(Args)]
struct PaperArgs {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Domain/configuration problems exit 2; anything else is a bug.
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().ok();
    }

    let mut config = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?.parse::<ExperimentConfig>()?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.set("seed", seed)?;
    }
    if let Some(format) = &cli.format {
        config.set("format", format)?;
    }

    let out = cli.out.as_deref();
    match cli.command {
        Command::Bounds(args) => cmd_bounds(args, &mut config, out),
        Command::Simulate(args) => cmd_simulate(args, &mut config, out),
        Command::Overflow(args) => cmd_overflow(args, &mut config, out),
        Command::Couple(args) => cmd_couple(args, &mut config, out),
        Command::Paper(_) => paper::cmd_paper(&config, cli.out.clone()),
    }
}

/// Flag value if present, else config value, else error.
fn require<T: Clone + std::fmt::Display + std::str::FromStr>(
    flag: Option<T>,
    config: &mut ExperimentConfig,
    key: &str,
) -> anyhow::Result<T>
where
    <T as std::str::FromStr>::Err: std::fmt::Display,
{
    optional(flag, config, key)?
        .ok_or_else(|| anyhow::anyhow!("missing `--{}` (or config key `{key}`)", key.replace('_', "-")))
}

fn optional<T: Clone + std::fmt::Display + std::str::FromStr>(
    flag: Option<T>,
    config: &mut ExperimentConfig,
    key: &str,
) -> anyhow::Result<Option<T>>
where
    <T as std::str::FromStr>::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        config.set(key, &v)?;
        return Ok(Some(v));
    }
    config.get_parsed::<T>(key)
}

fn seed_of(config: &ExperimentConfig) -> anyhow::Result<u64> {
    Ok(config.get_parsed::<u64>("seed")?.unwrap_or(0))
}

fn parse_bound(name: &str) -> anyhow::Result<BoundKind> {
    match name {
        "rho_pow" => Ok(BoundKind::RhoPow),
        "q_sequence" => Ok(BoundKind::QSequence),
        "exact_mm1" => Ok(BoundKind::ExactMm1),
        other => anyhow::bail!("unknown bound `{other}` (rho_pow | q_sequence | exact_mm1)"),
    }
}

/// Maps core domain/stability errors to exit code 2 via anyhow while
/// keeping their message.
fn core<T>(r: Result<T, Error>) -> anyhow::Result<T> {
    r.map_err(|e| anyhow::anyhow!("{e}"))
}

fn cmd_bounds(
    args: BoundsArgs,
    config: &mut ExperimentConfig,
    out: Option<&std::path::Path>,
) -> anyhow::Result<ExitCode> {
    let dist_spec: String = require(args.dist, config, "dist")?;
    let dist: ServiceDistribution = core(dist_spec.parse())?;
    let lambda = require(args.lambda, config, "lambda")?;
    let nmax = require(args.nmax, config, "nmax")?;
    let cycles = optional(args.cycles, config, "cycles")?;
    let seed = seed_of(config)?;

    let table = core(analytics::q_table(&dist, lambda, nmax))?;
    let empirical = match cycles {
        Some(cycles) => {
            let params = QueueParams { lambda, dist, discipline: Discipline::Fb };
            core(sim::estimate_exceedance(&params, nmax, cycles, seed, &EstimateOptions::default()))?
        }
        None => Vec::new(),
    };

    let rendered = match config.get("format").unwrap_or("csv") {
        "json" => {
            let v = bounds_json(Some(seed), config, &table.rows, &empirical);
            serde_json::to_string_pretty(&v)? + "\n"
        }
        _ => bounds_csv(Some(seed), config, &table.rows, &empirical),
    };
    emit(out, &rendered)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_simulate(
    args: SimulateArgs,
    config: &mut ExperimentConfig,
    out: Option<&std::path::Path>,
) -> anyhow::Result<ExitCode> {
    let dist_spec: String = require(args.dist, config, "dist")?;
    let dist: ServiceDistribution = core(dist_spec.parse())?;
    let lambda = require(args.lambda, config, "lambda")?;
    let discipline_name: String = require(args.discipline, config, "discipline")?;
    let discipline: Discipline = core(discipline_name.parse())?;
    let cycles = require(args.cycles, config, "cycles")?;
    let nmax = require(args.nmax, config, "nmax")?;
    let allow_unstable = args.allow_unstable
        || config.get_parsed::<bool>("allow_unstable")?.unwrap_or(false);
    if args.allow_unstable {
        config.set("allow_unstable", true)?;
    }
    let seed = seed_of(config)?;

    let params = QueueParams { lambda, dist, discipline };
    let opts = EstimateOptions { allow_unstable, ..Default::default() };
    let empirical = core(sim::estimate_exceedance(&params, nmax, cycles, seed, &opts))?;

    // Analytic columns accompany the estimate whenever they exist.
    let analytic = analytics::q_table(&dist, lambda, nmax).map(|t| t.rows).unwrap_or_default();

    if let Some(trace_path) = &args.trace {
        let mut streams = StreamPair::for_replication(seed, 0);
        let run = RunOptions { record_trace: true, ..Default::default() };
        let traced = core(sim::run_busy_cycle(&params, &mut streams, &run))?;
        let mut text = String::new();
        for ev in traced.trace.as_deref().unwrap_or_default() {
            text.push_str(&format!("{},{},{}\n", ev.clock, ev.kind, ev.queue_len));
        }
        emit(Some(trace_path), &text)?;
    }

    let rendered = match config.get("format").unwrap_or("csv") {
        "json" => {
            let v = bounds_json(Some(seed), config, &analytic, &empirical);
            serde_json::to_string_pretty(&v)? + "\n"
        }
        _ => bounds_csv(Some(seed), config, &analytic, &empirical),
    };
    emit(out, &rendered)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_overflow(
    args: OverflowArgs,
    config: &mut ExperimentConfig,
    out: Option<&std::path::Path>,
) -> anyhow::Result<ExitCode> {
    let dist_spec: String = require(args.dist, config, "dist")?;
    let dist: ServiceDistribution = core(dist_spec.parse())?;
    let lambda = require(args.lambda, config, "lambda")?;
    let d = require(args.d, config, "buffer")?;
    let p = require(args.p, config, "risk")?;
    let bound_name: String =
        optional(args.bound, config, "bound")?.unwrap_or_else(|| "rho_pow".into());
    let bound = parse_bound(&bound_name)?;
    let sigma_mult = optional(args.sigma_mult, config, "sigma_mult")?.unwrap_or(3.0);

    let fb = core(analytics::overflow_quantile(&dist, lambda, d, p, bound))?;
    let fifo = core(analytics::fifo_overflow_median_with(&dist, lambda, d, sigma_mult))?;

    let v = json!({
        "meta": json_meta(None, config),
        "fb_bound": {
            "d": fb.d,
            "p": fb.p,
            "mu": fb.mu,
            "pm_le_d_lower": fb.pm_le_d_lower,
            "ln_pm_gt_d": fb.ln_pm_gt_d,
            "t_quantile": fb.t_quantile,
            "log10_t": fb.log10_t,
            "bound_kind": fb.bound_kind.to_string(),
            "asymptotic": fb.asymptotic,
        },
        "fifo_heuristic": {
            "d": fifo.d,
            "threshold": fifo.threshold,
            "tail_prob": fifo.tail_prob,
            "t_median": fifo.t_median,
            "log10_t_median": fifo.t_median.log10(),
            "tail_underflowed": fifo.tail_underflowed,
            "sigma_mult": sigma_mult,
        },
    });
    emit(out, &(serde_json::to_string_pretty(&v)? + "\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_couple(
    args: CoupleArgs,
    config: &mut ExperimentConfig,
    out: Option<&std::path::Path>,
) -> anyhow::Result<ExitCode> {
    let f_spec: String = require(args.dist_f, config, "dist_f")?;
    let g_spec: String = require(args.dist_g, config, "dist_g")?;
    let dist_f: ServiceDistribution = core(f_spec.parse())?;
    let dist_g: ServiceDistribution = core(g_spec.parse())?;
    let p_splice = require(args.p_splice, config, "p_splice")?;
    let t_end = require(args.t, config, "horizon")?;
    let paths = require(args.paths, config, "paths")?;
    let lambda = require(args.lambda, config, "lambda")?;
    let seed = seed_of(config)?;

    let opts = CoupledOptions { p_splice, t_end, event_cap: 10_000_000 };
    let summary = core(sim::coupled_ensemble(lambda, &dist_f, &dist_g, &opts, paths, seed))?;

    let v = json!({
        "meta": json_meta(Some(seed), config),
        "paths": summary.paths,
        "events": summary.events,
        "count_violations": summary.count_violations,
        "age_class_violations": summary.age_class_violations,
        "max_f": summary.max_f,
        "max_g": summary.max_g,
    });
    emit(out, &(serde_json::to_string_pretty(&v)? + "\n"))?;
    Ok(ExitCode::SUCCESS)
}
