//! Experiment configuration: JSON file format and validation.
//!
//! A config file is a JSON object mirroring [`ExperimentConfig`]
//! field-for-field. Only `experiment`, `grid`, and `trials` are required;
//! the rest fall back to defaults suitable for desk-scale runs. Example:
//!
//! ```json
//! {
//!   "experiment": "sample-sweep",
//!   "grid": [100, 1000, 10000],
//!   "trials": 20,
//!   "dag": { "d": 20, "family": "er", "avg_degree": 4.0,
//!            "weight_low": 0.5, "weight_high": 2.0, "seed": 0 },
//!   "solver": { "threshold_tau": 0.3 },
//!   "output_path": "out",
//!   "master_seed": 0
//! }
//! ```
//!
//! The `solver` block accepts every [`SolverConfig`] knob. `alpha` is the
//! one knob treated specially: leaving it out (or `null`) selects the
//! sample-size-dependent default weight `0.05 * sqrt(log d / n)`, which a
//! static default could not express.
//!
//! The meaning of `grid` depends on the experiment: sample counts for
//! `sample-sweep`, node counts for `size-sweep`, noise variances for
//! `noise-sweep`, node counts for `landscape-cert`. `dag.seed` is never
//! used directly; per-trial seeds replace it.

use std::path::Path;

use nomad_core::acyclicity::AcyclicityKind;
use nomad_core::graphs::{DagSpec, GraphFamily};
use nomad_core::solver::SolverConfig;
use nomad_core::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    /// Estimation error as the sample count grows.
    SampleSweep,
    /// Support recovery as the graph size grows, for both graph families.
    SizeSweep,
    /// Estimation error as the noise variance grows, with and without the
    /// variance disclosed to the solver.
    NoiseSweep,
    /// Protein-signaling benchmark run.
    Sachs,
    /// Population-landscape certification sweep.
    LandscapeCert,
}

impl ExperimentKind {
    /// Stable identifier used in seeds, file names, and row labels.
    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::SampleSweep => "sample_sweep",
            ExperimentKind::SizeSweep => "size_sweep",
            ExperimentKind::NoiseSweep => "noise_sweep",
            ExperimentKind::Sachs => "sachs",
            ExperimentKind::LandscapeCert => "landscape_cert",
        }
    }
}

/// Solver knobs as written in a config file.
///
/// This mirrors [`SolverConfig`] field-for-field except that `alpha` is
/// optional; [`SolverSettings::to_config`] resolves it against the problem
/// dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub alpha: Option<f64>,
    pub lambda0: f64,
    pub c0: f64,
    pub beta: f64,
    pub gamma: f64,
    pub eta0: f64,
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub outer_max_iters: usize,
    pub h_tol: f64,
    pub acyclicity: AcyclicityKind,
    pub use_fista: bool,
    pub threshold_tau: f64,
    pub known_sigma2: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let base = SolverConfig::default();
        Self {
            alpha: None,
            lambda0: base.lambda0,
            c0: base.c0,
            beta: base.beta,
            gamma: base.gamma,
            eta0: base.eta0,
            inner_tol: base.inner_tol,
            inner_max_iters: base.inner_max_iters,
            outer_max_iters: base.outer_max_iters,
            h_tol: base.h_tol,
            acyclicity: base.acyclicity,
            use_fista: base.use_fista,
            threshold_tau: base.threshold_tau,
            known_sigma2: base.known_sigma2,
        }
    }
}

impl SolverSettings {
    /// Concrete solver configuration for a `d`-variable, `n`-sample problem.
    pub fn to_config(&self, d: usize, n: usize) -> SolverConfig {
        SolverConfig {
            alpha: self
                .alpha
                .unwrap_or_else(|| SolverConfig::default_alpha(d, n)),
            lambda0: self.lambda0,
            c0: self.c0,
            beta: self.beta,
            gamma: self.gamma,
            eta0: self.eta0,
            inner_tol: self.inner_tol,
            inner_max_iters: self.inner_max_iters,
            outer_max_iters: self.outer_max_iters,
            h_tol: self.h_tol,
            acyclicity: self.acyclicity,
            use_fista: self.use_fista,
            threshold_tau: self.threshold_tau,
            known_sigma2: self.known_sigma2,
        }
    }
}

fn default_samples() -> usize {
    1000
}

fn default_dag() -> DagSpec {
    DagSpec::new(20, GraphFamily::ErdosRenyi, 4.0, 0)
}

fn default_output() -> String {
    "out".to_string()
}

/// One experiment, fully specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Sweep values; interpretation depends on `experiment`.
    pub grid: Vec<f64>,
    /// Independent realizations per sweep value (seeds per node count for
    /// the certification sweep).
    pub trials: usize,
    /// Samples per trial for the sweeps whose grid is not a sample count.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Ground-truth template. Size sweeps override `d`, and every trial
    /// overrides `seed`.
    #[serde(default = "default_dag")]
    pub dag: DagSpec,
    /// Output directory; `--out` on the command line takes precedence.
    #[serde(default = "default_output")]
    pub output_path: String,
    #[serde(default)]
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Reads and validates a JSON config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        // The Sachs run has no sweep axis, so its grid may stay empty.
        if self.grid.is_empty() && self.experiment != ExperimentKind::Sachs {
            return Err(Error::Config("grid must be non-empty".into()));
        }
        match self.experiment {
            ExperimentKind::SampleSweep => {
                for &g in &self.grid {
                    require_count(g, "sample count")?;
                }
            }
            ExperimentKind::SizeSweep | ExperimentKind::LandscapeCert => {
                for &g in &self.grid {
                    require_count(g, "node count")?;
                }
            }
            ExperimentKind::NoiseSweep => {
                for &g in &self.grid {
                    if !(g > 0.0) || !g.is_finite() {
                        return Err(Error::Config(format!(
                            "noise variance {g} must be positive and finite"
                        )));
                    }
                }
            }
            ExperimentKind::Sachs => {}
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be at least 1".into()));
        }
        // Catch bad solver knobs before any trial starts. Representative
        // dimensions suffice: validity does not depend on d or n.
        self.solver
            .to_config(self.dag.d.max(2), self.samples)
            .validate()
    }
}

fn require_count(g: f64, what: &str) -> Result<()> {
    if !g.is_finite() || g < 1.0 || g.fract() != 0.0 || g > 1e9 {
        return Err(Error::Config(format!(
            "{what} {g} must be a positive integer"
        )));
    }
    Ok(())
}
