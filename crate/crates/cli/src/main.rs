//! Command-line front end.
//!
//! `nomad <subcommand> --config <path> [--jobs N] [--seed S] [--out DIR]`
//!
//! Sweeps are driven entirely by the config file; `--seed` overrides the
//! master seed and `--out` the output directory. `sachs` and `solve`
//! operate on a dataset file and treat the config as optional solver
//! tuning.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nomad_cli::config::{ExperimentConfig, ExperimentKind, SolverSettings};
use nomad_cli::experiments::{self, SweepOutput};
use nomad_cli::sachs::{self, Standardize};
use nomad_core::sem::read_dataset_csv;
use nomad_core::solver::{self, SolveInput};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "nomad",
    version,
    about = "Non-negative DAG learning from linear SEM data"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimation error versus sample count.
    SampleSweep(SweepArgs),
    /// Support recovery versus graph size, for both graph families.
    SizeSweep(SweepArgs),
    /// Estimation error versus noise variance, with and without the
    /// variance disclosed.
    NoiseSweep(SweepArgs),
    /// Protein-signaling benchmark.
    Sachs(SachsArgs),
    /// Population-landscape certification battery.
    LandscapeCert(SweepArgs),
    /// One-shot fit of a dataset CSV.
    Solve(SolveArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Concurrent trials; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SachsArgs {
    /// Observational data CSV (853 samples x 11 columns).
    #[arg(long)]
    data: PathBuf,
    /// Optional solver tuning (JSON; only the `solver` block is used).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comparison network; defaults to the embedded consensus graph.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Per-column treatment before the fit.
    #[arg(long, value_enum, default_value_t = StandardizeArg::Zscore)]
    standardize: StandardizeArg,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// Dataset CSV, one sample per row, optional header.
    #[arg(long)]
    data: PathBuf,
    /// Optional solver tuning (JSON; only the `solver` block is used).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Command-line face of [`Standardize`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StandardizeArg {
    None,
    Center,
    Zscore,
}

impl From<StandardizeArg> for Standardize {
    fn from(v: StandardizeArg) -> Self {
        match v {
            StandardizeArg::None => Standardize::None,
            StandardizeArg::Center => Standardize::Center,
            StandardizeArg::Zscore => Standardize::Zscore,
        }
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().cmd {
        Cmd::SampleSweep(a) => sweep(a, ExperimentKind::SampleSweep),
        Cmd::SizeSweep(a) => sweep(a, ExperimentKind::SizeSweep),
        Cmd::NoiseSweep(a) => sweep(a, ExperimentKind::NoiseSweep),
        Cmd::LandscapeCert(a) => landscape_cert(a),
        Cmd::Sachs(a) => run_sachs(a),
        Cmd::Solve(a) => run_solve(a),
    }
}

fn load_sweep_config(args: &SweepArgs, kind: ExperimentKind) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment != kind {
        bail!(
            "{} describes experiment {:?}, not {:?}",
            args.config.display(),
            cfg.experiment.id(),
            kind.id()
        );
    }
    if let Some(s) = args.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn with_pool<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> anyhow::Result<T> + Send,
) -> anyhow::Result<T> {
    match jobs {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .context("building thread pool")?;
            pool.install(f)
        }
    }
}

fn sweep(args: SweepArgs, kind: ExperimentKind) -> anyhow::Result<()> {
    let cfg = load_sweep_config(&args, kind)?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output_path));
    let run = match kind {
        ExperimentKind::SampleSweep => experiments::run_sample_sweep,
        ExperimentKind::SizeSweep => experiments::run_size_sweep,
        ExperimentKind::NoiseSweep => experiments::run_noise_sweep,
        _ => unreachable!("sweep() only handles row-producing sweeps"),
    };
    let output: SweepOutput = with_pool(args.jobs, || Ok(run(&cfg, &out_dir)?))?;
    let failed: usize = output.rows.iter().filter(|r| r.failed).count();
    println!(
        "{}: {} trials ({} failed), {} aggregate points",
        kind.id(),
        output.rows.len(),
        failed,
        output.aggregates.len()
    );
    for f in &output.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn landscape_cert(args: SweepArgs) -> anyhow::Result<()> {
    let cfg = load_sweep_config(&args, ExperimentKind::LandscapeCert)?;
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&cfg.output_path));
    let summary = with_pool(args.jobs, || {
        Ok(experiments::run_landscape_cert(&cfg, &out_dir)?)
    })?;
    println!(
        "landscape_cert: {}/{} instances passed{}",
        summary.n_passed,
        summary.n_total,
        if summary.all_passed { "" } else { " [FAIL]" }
    );
    println!("wrote {}", out_dir.join("landscape_cert.json").display());
    if !summary.all_passed {
        bail!("landscape certification failed");
    }
    Ok(())
}

fn solver_settings_from(config: Option<&Path>) -> anyhow::Result<SolverSettings> {
    match config {
        None => Ok(SolverSettings::default()),
        Some(path) => {
            // Accept either a full experiment config or a bare
            // `{"solver": {...}}` tuning file.
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            #[derive(serde::Deserialize)]
            struct Tuning {
                #[serde(default)]
                solver: SolverSettings,
            }
            let tuning: Tuning = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            Ok(tuning.solver)
        }
    }
}

fn run_sachs(args: SachsArgs) -> anyhow::Result<()> {
    let settings = solver_settings_from(args.config.as_deref())?;
    let outcome = sachs::run_sachs(
        &args.data,
        args.reference.as_deref(),
        args.standardize.into(),
        &settings,
        &args.out,
    )?;
    println!(
        "sachs: shd={} tpr={:.3} fdr={:.3} f1={:.3} edges={} converged={} (standardize={}, alpha={:.4})",
        outcome.metrics.shd,
        outcome.metrics.tpr,
        outcome.metrics.fdr,
        outcome.metrics.f1,
        outcome.estimate_edges,
        outcome.converged,
        outcome.standardize,
        outcome.solver.alpha,
    );
    println!("wrote {}", args.out.join("sachs_report.json").display());
    Ok(())
}

#[derive(Serialize)]
struct SolveSummary {
    d: usize,
    n: usize,
    alpha: f64,
    converged: bool,
    final_h: f64,
    outer_iters: usize,
    edges: usize,
    wall_time: f64,
    seed_note: &'static str,
}

fn run_solve(args: SolveArgs) -> anyhow::Result<()> {
    let settings = solver_settings_from(args.config.as_deref())?;
    let (ds, _header) = read_dataset_csv(&args.data)?;
    let cfg = settings.to_config(ds.d, ds.n);
    let res = solver::solve(SolveInput::Dataset(&ds), &cfg)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    res.w_raw.write_csv(args.out.join("w_raw.csv"))?;
    res.w_dag.write_csv(args.out.join("w_dag.csv"))?;
    let summary = SolveSummary {
        d: ds.d,
        n: ds.n,
        alpha: cfg.alpha,
        converged: res.converged,
        final_h: res.final_h,
        outer_iters: res.outer_iters,
        edges: res.w_dag.edge_count(),
        wall_time: res.wall_time,
        seed_note: "deterministic: the solver starts from the zero matrix",
    };
    std::fs::write(
        args.out.join("solve_summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "solve: d={} n={} edges={} converged={} final_h={:.3e} ({} outer iterations)",
        summary.d, summary.n, summary.edges, summary.converged, summary.final_h, summary.outer_iters
    );
    println!("wrote {}", args.out.join("w_dag.csv").display());
    Ok(())
}
