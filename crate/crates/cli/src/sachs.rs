//! Protein-signaling benchmark: data ingestion, reference network, and the
//! end-to-end evaluation run.
//!
//! The observational slice of the flow-cytometry dataset has 853 samples of
//! 11 phosphoproteins and phospholipids; the loader enforces that shape.
//! Column names vary across published copies (antibody labels such as
//! `praf` or `p44/42` versus protein names), so headers pass through an
//! alias table and the columns are reordered into one canonical order. A
//! headerless file is assumed to already use the canonical order.
//!
//! The comparison target is the 17-arc consensus network distributed with
//! the dataset, embedded here as [`reference_network`]; `--reference`
//! substitutes a user-supplied edge list (`src,dst` per line, names or
//! 0-based indices) or an 11 x 11 weight matrix.
//!
//! Real data carries arbitrary per-column scales, so columns are
//! standardized before the fit: `zscore` (default) centers each column and
//! divides by its sample standard deviation (n - 1 divisor), `center` only
//! subtracts the mean, `none` fits the raw columns. The reference arcs are
//! unweighted; they enter the error norm with weight 1, so the support
//! metrics are the meaningful numbers and the error norm is reported for
//! completeness only.

use std::path::Path;

use nomad_core::linalg::DenseMatrix;
use nomad_core::metrics::{self, MetricsReport};
use nomad_core::sem::{read_dataset_csv, DataSource, Dataset};
use nomad_core::solver::{self, SolveInput, SolverConfig};
use nomad_core::{Error, Result, WeightMatrix};
use serde::{Deserialize, Serialize};

use crate::config::SolverSettings;

/// Canonical node order used everywhere in this module.
pub const NODES: [&str; 11] = [
    "raf", "mek", "plcg", "pip2", "pip3", "erk", "akt", "pka", "pkc", "p38", "jnk",
];

const EXPECTED_SAMPLES: usize = 853;

/// The 17 consensus arcs, as (parent, child) indices into [`NODES`].
const REFERENCE_ARCS: [(usize, usize); 17] = [
    (0, 1),  // raf -> mek
    (1, 5),  // mek -> erk
    (2, 3),  // plcg -> pip2
    (2, 4),  // plcg -> pip3
    (4, 3),  // pip3 -> pip2
    (5, 6),  // erk -> akt
    (7, 6),  // pka -> akt
    (7, 5),  // pka -> erk
    (7, 10), // pka -> jnk
    (7, 1),  // pka -> mek
    (7, 9),  // pka -> p38
    (7, 0),  // pka -> raf
    (8, 10), // pkc -> jnk
    (8, 1),  // pkc -> mek
    (8, 9),  // pkc -> p38
    (8, 7),  // pkc -> pka
    (8, 0),  // pkc -> raf
];

/// Embedded consensus network with unit weights.
pub fn reference_network() -> WeightMatrix {
    let mut m = vec![0.0; 11 * 11];
    for &(i, j) in &REFERENCE_ARCS {
        m[i * 11 + j] = 1.0;
    }
    let m = DenseMatrix::from_vec(11, 11, m).expect("static shape");
    WeightMatrix::new(m).expect("consensus arcs form a DAG")
}

/// Maps a published column label onto its canonical node name.
pub fn normalize_name(raw: &str) -> Option<&'static str> {
    let key = raw.trim().to_ascii_lowercase();
    let name = match key.as_str() {
        "raf" | "praf" => "raf",
        "mek" | "pmek" => "mek",
        "plcg" | "plc-g" | "plcgamma" => "plcg",
        "pip2" => "pip2",
        "pip3" => "pip3",
        "erk" | "p44/42" | "p44.42" | "p44_42" => "erk",
        "akt" | "pakts473" | "akts473" => "akt",
        "pka" => "pka",
        "pkc" => "pkc",
        "p38" => "p38",
        "jnk" | "pjnk" => "jnk",
        _ => return None,
    };
    Some(name)
}

/// Per-column treatment applied before the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Standardize {
    None,
    Center,
    #[default]
    Zscore,
}

impl Standardize {
    pub fn id(self) -> &'static str {
        match self {
            Standardize::None => "none",
            Standardize::Center => "center",
            Standardize::Zscore => "zscore",
        }
    }
}

/// Loads the benchmark CSV, reorders columns canonically, checks the
/// 853 x 11 shape, and standardizes.
pub fn load_data(path: impl AsRef<Path>, standardize: Standardize) -> Result<Dataset> {
    let path = path.as_ref();
    let (ds, header) = read_dataset_csv(path)?;
    let order: Vec<usize> = match header {
        Some(names) => {
            let mut found = [None; 11];
            for (col, raw) in names.iter().enumerate() {
                let Some(name) = normalize_name(raw) else {
                    return Err(Error::Data(format!("unrecognized column {raw:?}")));
                };
                let slot = NODES.iter().position(|&n| n == name).expect("canonical");
                if found[slot].is_some() {
                    return Err(Error::Data(format!("duplicate column {raw:?}")));
                }
                found[slot] = Some(col);
            }
            found
                .iter()
                .enumerate()
                .map(|(slot, col)| {
                    col.ok_or_else(|| Error::Data(format!("missing column {:?}", NODES[slot])))
                })
                .collect::<Result<_>>()?
        }
        None => (0..ds.d).collect(),
    };
    if ds.d != 11 || ds.n != EXPECTED_SAMPLES {
        return Err(Error::Data(format!(
            "expected {EXPECTED_SAMPLES} x 11 observational data, found {} x {}",
            ds.n, ds.d
        )));
    }

    let n = ds.n;
    let stats: Vec<(f64, f64)> = order
        .iter()
        .map(|&src| {
            let mean = (0..n).map(|s| ds.x.get(src, s)).sum::<f64>() / n as f64;
            let var = (0..n)
                .map(|s| (ds.x.get(src, s) - mean).powi(2))
                .sum::<f64>()
                / (n - 1) as f64;
            (mean, var.sqrt())
        })
        .collect();
    if standardize == Standardize::Zscore {
        if let Some(i) = stats.iter().position(|&(_, sd)| !(sd > 0.0)) {
            return Err(Error::Data(format!(
                "column {:?} is constant; cannot scale to unit variance",
                NODES[i]
            )));
        }
    }
    let x = DenseMatrix::from_fn(11, n, |i, s| {
        let v = ds.x.get(order[i], s);
        match standardize {
            Standardize::None => v,
            Standardize::Center => v - stats[i].0,
            Standardize::Zscore => (v - stats[i].0) / stats[i].1,
        }
    });
    Ok(Dataset {
        d: 11,
        n,
        x,
        noise_variance: None,
        source: DataSource::File(path.display().to_string()),
    })
}

/// Reads a comparison network: either `src,dst` arcs (an optional literal
/// `src,dst` header line is skipped) or a full 11 x 11 weight matrix.
pub fn load_reference(path: impl AsRef<Path>) -> Result<WeightMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let first_width = lines
        .first()
        .map(|l| l.split(',').count())
        .ok_or_else(|| Error::Data(format!("{}: empty reference file", path.display())))?;
    if first_width != 2 {
        let w = WeightMatrix::from_csv_str(&text)?;
        if w.d() != 11 {
            return Err(Error::Data(format!(
                "reference matrix is {0} x {0}, expected 11 x 11",
                w.d()
            )));
        }
        return Ok(w);
    }

    let mut m = vec![0.0; 11 * 11];
    for (lineno, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Data(format!(
                "reference line {} is not `src,dst`",
                lineno + 1
            )));
        }
        if lineno == 0
            && fields[0].eq_ignore_ascii_case("src")
            && fields[1].eq_ignore_ascii_case("dst")
        {
            continue;
        }
        let idx = |tok: &str| -> Result<usize> {
            if let Ok(i) = tok.parse::<usize>() {
                if i < 11 {
                    return Ok(i);
                }
                return Err(Error::Data(format!("node index {i} out of range")));
            }
            normalize_name(tok)
                .map(|name| NODES.iter().position(|&n| n == name).expect("canonical"))
                .ok_or_else(|| Error::Data(format!("unknown node {tok:?}")))
        };
        m[idx(fields[0])? * 11 + idx(fields[1])?] = 1.0;
    }
    WeightMatrix::new(DenseMatrix::from_vec(11, 11, m).expect("static shape"))
}

/// Everything a benchmark run produced and every knob it used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SachsOutcome {
    pub d: usize,
    pub n: usize,
    pub nodes: Vec<String>,
    pub standardize: String,
    /// Exact solver configuration after alpha resolution.
    pub solver: SolverConfig,
    pub converged: bool,
    pub outer_iters: usize,
    pub final_h: f64,
    pub estimate_edges: usize,
    pub reference_edges: usize,
    /// Estimate versus reference; the error norm compares against unit
    /// reference weights.
    pub metrics: MetricsReport,
    /// Reference compared against itself; anything but zero means the
    /// comparison plumbing itself is broken.
    pub self_check_shd: usize,
}

/// Runs the benchmark end to end and writes the learned graphs plus a JSON
/// report into `out_dir`.
pub fn run_sachs(
    data_path: impl AsRef<Path>,
    reference_path: Option<&Path>,
    standardize: Standardize,
    settings: &SolverSettings,
    out_dir: &Path,
) -> Result<SachsOutcome> {
    let ds = load_data(data_path, standardize)?;
    let reference = match reference_path {
        Some(p) => load_reference(p)?,
        None => reference_network(),
    };
    if !reference.is_acyclic() {
        return Err(Error::Data("reference network contains a cycle".into()));
    }
    let self_check_shd = metrics::shd(&reference, &reference)?;

    let cfg = settings.to_config(ds.d, ds.n);
    let res = solver::solve(SolveInput::Dataset(&ds), &cfg)?;
    let report = metrics::evaluate(&res.w_raw, &res.w_dag, &reference, res.wall_time)?;

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Error::Data(format!("{}: {e}", out_dir.display())))?;
    res.w_raw.write_csv(out_dir.join("sachs_estimate_raw.csv"))?;
    res.w_dag.write_csv(out_dir.join("sachs_estimate.csv"))?;

    let outcome = SachsOutcome {
        d: ds.d,
        n: ds.n,
        nodes: NODES.iter().map(|s| s.to_string()).collect(),
        standardize: standardize.id().to_string(),
        solver: cfg,
        converged: res.converged,
        outer_iters: res.outer_iters,
        final_h: res.final_h,
        estimate_edges: res.w_dag.edge_count(),
        reference_edges: reference.edge_count(),
        metrics: report,
        self_check_shd,
    };
    let json = serde_json::to_string_pretty(&outcome)
        .map_err(|e| Error::Data(format!("serializing report: {e}")))?;
    let report_path = out_dir.join("sachs_report.json");
    std::fs::write(&report_path, json)
        .map_err(|e| Error::Data(format!("{}: {e}", report_path.display())))?;
    Ok(outcome)
}
