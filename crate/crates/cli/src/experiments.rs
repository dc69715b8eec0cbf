//! Monte Carlo sweeps and result aggregation.
//!
//! Each sweep expands its grid into `(curve, sweep value, trial)` tasks,
//! runs them concurrently, and writes two kinds of CSV into the output
//! directory:
//!
//! - `<experiment>_rows.csv`, one row per task, columns in this order:
//!   `experiment, curve, sweep_value, trial, seed, failed, error,
//!   converged, outer_iters, final_h, nerr, shd, shd_normalized, tpr,
//!   fdr, f1, wall_time`. Failed trials leave the result columns empty and
//!   carry the error message.
//! - `<experiment>_<curve>.csv`, one plot-ready file per curve, columns:
//!   `curve, sweep_value, n_trials, n_failed, nerr_p25, nerr_median,
//!   nerr_p75, shd_normalized_p25, shd_normalized_median,
//!   shd_normalized_p75`. Failed trials are excluded from the percentiles
//!   and counted in `n_failed`.
//!
//! Percentiles interpolate linearly between closest ranks, so the
//! aggregate file can be recomputed exactly from the rows file. Every
//! number that is not a wall-clock time is bit-reproducible run to run;
//! re-running a single task through [`run_trial`] reproduces its row.
//!
//! The certification sweep instead writes `landscape_cert.json`: an object
//! `{experiment, master_seed, n_total, n_passed, all_passed, entries}`
//! where each entry is `{d, seed_index, seed, error?, report?}` and
//! `report` is a full per-instance certification record.

use std::path::{Path, PathBuf};

use nomad_core::graphs::{generate_dag, DagSpec, GraphFamily};
use nomad_core::landscape::{certify, CertificationReport, CertifyOptions};
use nomad_core::sem::simulate;
use nomad_core::solver::{self, SolveInput};
use nomad_core::{metrics, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::seeding::{self, DATA_STREAM, GRAPH_STREAM};

/// Outcome of one `(curve, sweep value, trial)` task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub curve: String,
    pub sweep_value: f64,
    pub trial: usize,
    pub seed: u64,
    /// True when the trial errored out; such rows carry no results and are
    /// excluded from aggregation.
    pub failed: bool,
    pub error: String,
    pub converged: Option<bool>,
    pub outer_iters: Option<usize>,
    pub final_h: Option<f64>,
    pub nerr: Option<f64>,
    pub shd: Option<usize>,
    pub shd_normalized: Option<f64>,
    pub tpr: Option<f64>,
    pub fdr: Option<f64>,
    pub f1: Option<f64>,
    pub wall_time: Option<f64>,
}

/// One aggregated point of one curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub curve: String,
    pub sweep_value: f64,
    pub n_trials: usize,
    pub n_failed: usize,
    pub nerr_p25: f64,
    pub nerr_median: f64,
    pub nerr_p75: f64,
    pub shd_normalized_p25: f64,
    pub shd_normalized_median: f64,
    pub shd_normalized_p75: f64,
}

/// Everything a sweep produced, already written to disk.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
    pub files: Vec<PathBuf>,
}

fn curves_for(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::SampleSweep => &["logdet"],
        ExperimentKind::SizeSweep => &["er", "sf"],
        ExperimentKind::NoiseSweep => &["logdet", "logdet_sigma"],
        ExperimentKind::Sachs | ExperimentKind::LandscapeCert => &[],
    }
}

/// Runs one task in isolation. Errors become a flagged row, never a panic,
/// so one bad trial cannot take down a sweep.
pub fn run_trial(cfg: &ExperimentConfig, curve: &str, sweep_value: f64, trial: usize) -> ResultRow {
    let id = cfg.experiment.id();
    let seed = seeding::trial_seed(cfg.master_seed, id, sweep_value, trial as u64);
    let mut row = ResultRow {
        experiment: id.to_string(),
        curve: curve.to_string(),
        sweep_value,
        trial,
        seed,
        failed: false,
        error: String::new(),
        converged: None,
        outer_iters: None,
        final_h: None,
        nerr: None,
        shd: None,
        shd_normalized: None,
        tpr: None,
        fdr: None,
        f1: None,
        wall_time: None,
    };
    match run_trial_inner(cfg, curve, sweep_value, seed) {
        Ok(out) => {
            row.converged = Some(out.res.converged);
            row.outer_iters = Some(out.res.outer_iters);
            row.final_h = Some(out.res.final_h);
            row.nerr = out.nerr;
            row.shd = Some(out.shd);
            row.shd_normalized = Some(out.shd_normalized);
            row.tpr = Some(out.tpr);
            row.fdr = Some(out.fdr);
            row.f1 = Some(out.f1);
            row.wall_time = Some(out.res.wall_time);
        }
        Err(e) => {
            row.failed = true;
            row.error = e.to_string();
        }
    }
    row
}

struct TrialOutput {
    res: solver::SolveResult,
    /// Absent only for an edgeless ground truth, where the normalization
    /// in the error ratio degenerates.
    nerr: Option<f64>,
    shd: usize,
    shd_normalized: f64,
    tpr: f64,
    fdr: f64,
    f1: f64,
}

fn run_trial_inner(
    cfg: &ExperimentConfig,
    curve: &str,
    sweep_value: f64,
    seed: u64,
) -> Result<TrialOutput> {
    // Decode what the sweep axis and curve mean for this experiment.
    let (d, n, sigma2, family, known_sigma2) = match cfg.experiment {
        ExperimentKind::SampleSweep => (
            cfg.dag.d,
            sweep_value as usize,
            1.0,
            cfg.dag.family,
            cfg.solver.known_sigma2,
        ),
        ExperimentKind::SizeSweep => {
            let family = match curve {
                "er" => GraphFamily::ErdosRenyi,
                "sf" => GraphFamily::ScaleFree,
                other => {
                    return Err(Error::Config(format!("unknown size-sweep curve {other}")));
                }
            };
            (
                sweep_value as usize,
                cfg.samples,
                1.0,
                family,
                cfg.solver.known_sigma2,
            )
        }
        ExperimentKind::NoiseSweep => {
            let known = match curve {
                "logdet" => None,
                "logdet_sigma" => Some(sweep_value),
                other => {
                    return Err(Error::Config(format!("unknown noise-sweep curve {other}")));
                }
            };
            (cfg.dag.d, cfg.samples, sweep_value, cfg.dag.family, known)
        }
        other => {
            return Err(Error::Config(format!(
                "{} is not a row-producing sweep",
                other.id()
            )));
        }
    };

    let mut dag_spec = cfg.dag.clone();
    dag_spec.d = d;
    dag_spec.family = family;
    // A degree target above d - 1 is unsatisfiable at small d; clamp so one
    // template serves the whole size grid.
    dag_spec.avg_degree = dag_spec.avg_degree.min((d.saturating_sub(1)) as f64);
    dag_spec.seed = seeding::derive(seed, GRAPH_STREAM);

    let w0 = generate_dag(&dag_spec)?;
    let ds = simulate(&w0, n, sigma2, seeding::derive(seed, DATA_STREAM))?;

    let mut solver_cfg = cfg.solver.to_config(d, n);
    solver_cfg.known_sigma2 = known_sigma2;
    let res = solver::solve(SolveInput::Dataset(&ds), &solver_cfg)?;
    let nerr = match metrics::nerr(&res.w_raw, &w0) {
        Ok(v) => Some(v),
        Err(Error::DegenerateTruth) => None,
        Err(e) => return Err(e),
    };
    let shd = metrics::shd(&res.w_dag, &w0)?;
    let (tpr, fdr, f1) = metrics::support_confusion(&res.w_dag, &w0)?;
    Ok(TrialOutput {
        nerr,
        shd,
        shd_normalized: shd as f64 / d as f64,
        tpr,
        fdr,
        f1,
        res,
    })
}

/// Linear interpolation between closest ranks; `data` must be sorted.
fn percentile(data: &[f64], p: f64) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let h = (data.len() - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    data[lo] + (data[hi] - data[lo]) * (h - lo as f64)
}

/// Aggregates the rows of one experiment into per-curve summary points,
/// preserving grid order.
pub fn aggregate(rows: &[ResultRow], curves: &[&str], grid: &[f64]) -> Vec<AggregateRow> {
    let mut out = Vec::new();
    for &curve in curves {
        for &g in grid {
            let bucket: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.curve == curve && r.sweep_value == g)
                .collect();
            let n_trials = bucket.len();
            let ok: Vec<&&ResultRow> = bucket.iter().filter(|r| !r.failed).collect();
            let n_failed = n_trials - ok.len();
            let mut nerrs: Vec<f64> = ok.iter().filter_map(|r| r.nerr).collect();
            let mut shds: Vec<f64> = ok.iter().filter_map(|r| r.shd_normalized).collect();
            nerrs.sort_by(f64::total_cmp);
            shds.sort_by(f64::total_cmp);
            out.push(AggregateRow {
                curve: curve.to_string(),
                sweep_value: g,
                n_trials,
                n_failed,
                nerr_p25: percentile(&nerrs, 25.0),
                nerr_median: percentile(&nerrs, 50.0),
                nerr_p75: percentile(&nerrs, 75.0),
                shd_normalized_p25: percentile(&shds, 25.0),
                shd_normalized_median: percentile(&shds, 50.0),
                shd_normalized_p75: percentile(&shds, 75.0),
            });
        }
    }
    out
}

fn write_csv<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    for r in records {
        w.serialize(r)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    }
    w.flush()
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

/// Reads a rows file back, for audits and the aggregate round-trip check.
pub fn read_rows_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|rec| rec.map_err(|e| Error::Data(format!("{}: {e}", path.display()))))
        .collect()
}

fn run_sweep(cfg: &ExperimentConfig, kind: ExperimentKind, out_dir: &Path) -> Result<SweepOutput> {
    if cfg.experiment != kind {
        return Err(Error::Config(format!(
            "config describes {}, not {}",
            cfg.experiment.id(),
            kind.id()
        )));
    }
    cfg.validate()?;
    let curves = curves_for(kind);
    let tasks: Vec<(&str, f64, usize)> = curves
        .iter()
        .flat_map(|&c| {
            cfg.grid
                .iter()
                .flat_map(move |&g| (0..cfg.trials).map(move |t| (c, g, t)))
        })
        .collect();

    // Tasks are independent and self-seeded; collect preserves task order,
    // so the files do not depend on scheduling.
    let rows: Vec<ResultRow> = tasks
        .par_iter()
        .map(|&(c, g, t)| run_trial(cfg, c, g, t))
        .collect();

    let aggregates = aggregate(&rows, curves, &cfg.grid);

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Data(format!("{}: {e}", out_dir.display())))?;
    let mut files = Vec::new();
    let rows_path = out_dir.join(format!("{}_rows.csv", kind.id()));
    write_csv(&rows_path, &rows)?;
    files.push(rows_path);
    for &curve in curves {
        let per: Vec<&AggregateRow> = aggregates.iter().filter(|a| a.curve == curve).collect();
        let path = out_dir.join(format!("{}_{curve}.csv", kind.id()));
        write_csv(&path, &per)?;
        files.push(path);
    }
    Ok(SweepOutput {
        rows,
        aggregates,
        files,
    })
}

/// Estimation error as the sample count grows (grid = sample counts).
pub fn run_sample_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SweepOutput> {
    run_sweep(cfg, ExperimentKind::SampleSweep, out_dir)
}

/// Support recovery as the graph grows (grid = node counts), one curve per
/// graph family.
pub fn run_size_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SweepOutput> {
    run_sweep(cfg, ExperimentKind::SizeSweep, out_dir)
}

/// Robustness as the noise grows (grid = variances); the `logdet_sigma`
/// curve reruns each trial with the variance disclosed to the solver, on
/// the same data as the plain curve.
pub fn run_noise_sweep(cfg: &ExperimentConfig, out_dir: &Path) -> Result<SweepOutput> {
    run_sweep(cfg, ExperimentKind::NoiseSweep, out_dir)
}

/// One certification attempt of [`run_landscape_cert`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertEntry {
    pub d: usize,
    pub seed_index: usize,
    pub seed: u64,
    /// Set when certification aborted before producing a report; such an
    /// entry counts as failed.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub report: Option<CertificationReport>,
}

/// Aggregated landscape certification outcome across the whole grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandscapeCertSummary {
    pub experiment: String,
    pub master_seed: u64,
    pub n_total: usize,
    pub n_passed: usize,
    pub all_passed: bool,
    pub entries: Vec<CertEntry>,
}

/// Runs the full landscape check battery for every `(node count, seed)`
/// pair and writes `landscape_cert.json`.
pub fn run_landscape_cert(cfg: &ExperimentConfig, out_dir: &Path) -> Result<LandscapeCertSummary> {
    if cfg.experiment != ExperimentKind::LandscapeCert {
        return Err(Error::Config(format!(
            "config describes {}, not landscape_cert",
            cfg.experiment.id()
        )));
    }
    cfg.validate()?;
    let id = cfg.experiment.id();
    let tasks: Vec<(usize, usize)> = cfg
        .grid
        .iter()
        .flat_map(|&g| (0..cfg.trials).map(move |t| (g as usize, t)))
        .collect();

    let entries: Vec<CertEntry> = tasks
        .par_iter()
        .map(|&(d, t)| {
            let seed = seeding::trial_seed(cfg.master_seed, id, d as f64, t as u64);
            let mut spec = DagSpec::new(
                d,
                cfg.dag.family,
                cfg.dag.avg_degree.min((d.saturating_sub(1)) as f64),
                seeding::derive(seed, GRAPH_STREAM),
            );
            spec.weight_low = cfg.dag.weight_low;
            spec.weight_high = cfg.dag.weight_high;
            let opts = CertifyOptions {
                seed,
                ..CertifyOptions::default()
            };
            match certify(&spec, &opts) {
                Ok(report) => CertEntry {
                    d,
                    seed_index: t,
                    seed,
                    error: None,
                    report: Some(report),
                },
                Err(e) => CertEntry {
                    d,
                    seed_index: t,
                    seed,
                    error: Some(e.to_string()),
                    report: None,
                },
            }
        })
        .collect();

    let n_total = entries.len();
    let n_passed = entries
        .iter()
        .filter(|e| e.report.as_ref().is_some_and(|r| r.passed))
        .count();
    let summary = LandscapeCertSummary {
        experiment: id.to_string(),
        master_seed: cfg.master_seed,
        n_total,
        n_passed,
        all_passed: n_passed == n_total,
        entries,
    };

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Data(format!("{}: {e}", out_dir.display())))?;
    let path = out_dir.join("landscape_cert.json");
    let text = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Data(format!("serializing report: {e}")))?;
    std::fs::write(&path, text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    Ok(summary)
}
