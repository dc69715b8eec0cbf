//! Linear structural-equation data: simulation and covariance matrices.
//!
//! The model is `x = W0^T x + z` with `W0` a weighted DAG and independent
//! noise `z`, so a draw is obtained by sweeping the nodes in topological
//! order. Estimation consumes data only through the second moment
//! `n^{-1} X X^T`, computed here without mean removal: the model is
//! zero-mean by construction, and the estimator's gradient is defined in
//! terms of this uncentered moment.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::WeightMatrix;
use crate::linalg::{self, DenseMatrix};

/// Provenance of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DataSource {
    /// Simulated from a known ground-truth graph.
    Synthetic,
    /// Loaded from an external file.
    File(String),
}

/// Observations arranged with one variable per row: `x` is `d x n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub d: usize,
    pub n: usize,
    pub x: DenseMatrix,
    /// Noise variance used to generate the data, when known.
    pub noise_variance: Option<f64>,
    pub source: DataSource,
}

/// Which moment a covariance matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CovarianceKind {
    /// Uncentered sample second moment `n^{-1} X X^T`.
    Sample,
    /// Exact model covariance implied by a graph and noise variance.
    Population,
}

/// Symmetric positive semidefinite second-moment matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub d: usize,
    pub sigma: DenseMatrix,
    pub kind: CovarianceKind,
}

impl Covariance {
    /// Validates shape and symmetry (to one part in 1e12) and wraps.
    pub fn new(sigma: DenseMatrix, kind: CovarianceKind) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::dimension(
                "square covariance",
                format!("{}x{}", sigma.rows(), sigma.cols()),
            ));
        }
        let d = sigma.rows();
        let scale = sigma.max_abs().max(1.0);
        for i in 0..d {
            for j in i + 1..d {
                if (sigma.get(i, j) - sigma.get(j, i)).abs() > 1e-12 * scale {
                    return Err(Error::Data(format!(
                        "covariance asymmetry at ({i}, {j}): {} vs {}",
                        sigma.get(i, j),
                        sigma.get(j, i)
                    )));
                }
            }
        }
        Ok(Self { d, sigma, kind })
    }

    /// Same covariance divided by a known noise variance.
    pub fn whitened(&self, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) {
            return Err(Error::Config(format!(
                "noise variance must be positive, got {sigma2}"
            )));
        }
        Ok(Self {
            d: self.d,
            sigma: self.sigma.scale(1.0 / sigma2),
            kind: self.kind,
        })
    }
}

/// Draws `n` samples of the linear SEM `x = w0^T x + z` with Gaussian noise
/// of variance `noise_variance`, using a fixed-order sweep so the output is
/// bitwise deterministic for a given `(w0, n, noise_variance, seed)`.
pub fn simulate(w0: &WeightMatrix, n: usize, noise_variance: f64, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("sample count must be positive".into()));
    }
    if !(noise_variance > 0.0) || !noise_variance.is_finite() {
        return Err(Error::Config(format!(
            "noise variance must be positive and finite, got {noise_variance}"
        )));
    }
    let order = topological_order(w0)?;
    let d = w0.d();
    let std = noise_variance.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Noise is drawn row by row in node index order, independent of the
    // topological order, so equal graphs with different generation seeds
    // still consume the stream identically.
    let mut x = DenseMatrix::zeros(d, n);
    for i in 0..d {
        for s in 0..n {
            let z: f64 = StandardNormal.sample(&mut rng);
            x.set(i, s, std * z);
        }
    }

    // Sweep x_j = sum_i w0_ij x_i + z_j in topological order.
    for &j in &order {
        let parents: Vec<(usize, f64)> = (0..d)
            .filter_map(|i| {
                let w = w0.get(i, j);
                (w > 0.0).then_some((i, w))
            })
            .collect();
        if parents.is_empty() {
            continue;
        }
        for s in 0..n {
            let mut acc = x.get(j, s);
            for &(i, w) in &parents {
                acc += w * x.get(i, s);
            }
            x.set(j, s, acc);
        }
    }

    Ok(Dataset {
        d,
        n,
        x,
        noise_variance: Some(noise_variance),
        source: DataSource::Synthetic,
    })
}

/// Uncentered second moment `n^{-1} X X^T` of a dataset.
pub fn sample_covariance(ds: &Dataset) -> Result<Covariance> {
    let d = ds.d;
    let n = ds.n;
    let mut sigma = DenseMatrix::zeros(d, d);
    for i in 0..d {
        let row_i = ds.x.row(i);
        for j in i..d {
            let row_j = ds.x.row(j);
            let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
            let v = dot / n as f64;
            sigma.set(i, j, v);
            sigma.set(j, i, v);
        }
    }
    Covariance::new(sigma, CovarianceKind::Sample)
}

/// Exact covariance `sigma2 (I - w0)^{-T} (I - w0)^{-1}` of the model.
pub fn population_covariance(w0: &WeightMatrix, sigma2: f64) -> Result<Covariance> {
    if !(sigma2 > 0.0) {
        return Err(Error::Config(format!(
            "noise variance must be positive, got {sigma2}"
        )));
    }
    let d = w0.d();
    let m0 = &DenseMatrix::identity(d) - w0.matrix();
    let inv = linalg::inverse(&m0)?;
    let sigma = inv.transpose().matmul(&inv).scale(sigma2);
    // Symmetrize away factorization round-off before validation.
    let sym = DenseMatrix::from_fn(d, d, |i, j| 0.5 * (sigma.get(i, j) + sigma.get(j, i)));
    Covariance::new(sym, CovarianceKind::Population)
}

/// Topological order of the support, or [`Error::Cyclic`].
fn topological_order(w: &WeightMatrix) -> Result<Vec<usize>> {
    let d = w.d();
    let mut in_degree = vec![0usize; d];
    for (_, j, _) in w.edges() {
        in_degree[j] += 1;
    }
    let mut ready: Vec<usize> = (0..d).filter(|&j| in_degree[j] == 0).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(i) = ready.pop() {
        order.push(i);
        for j in 0..d {
            if w.get(i, j) > 0.0 {
                in_degree[j] -= 1;
                if in_degree[j] == 0 {
                    ready.push(j);
                }
            }
        }
    }
    if order.len() != d {
        return Err(Error::Cyclic);
    }
    Ok(order)
}

/// Reads a dataset from CSV with one sample per row and `d` columns; a
/// leading header row of variable names is detected and returned alongside.
pub fn read_dataset_csv(path: impl AsRef<Path>) -> Result<(Dataset, Option<Vec<String>>)> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
    let (ds, header) = parse_dataset_csv(&text)?;
    let ds = Dataset {
        source: DataSource::File(path.as_ref().display().to_string()),
        ..ds
    };
    Ok((ds, header))
}

/// Parses the CSV format accepted by [`read_dataset_csv`].
pub fn parse_dataset_csv(text: &str) -> Result<(Dataset, Option<Vec<String>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let header = match lines.peek() {
        Some(first) if split_fields(first).iter().any(|tok| tok.parse::<f64>().is_err()) => {
            let names: Vec<String> = split_fields(first).iter().map(|s| s.to_string()).collect();
            lines.next();
            Some(names)
        }
        _ => None,
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for line in lines {
        let row: Result<Vec<f64>> = split_fields(line)
            .iter()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::Data(format!("invalid number {tok:?} in dataset CSV")))
            })
            .collect();
        rows.push(row?);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Data("dataset CSV has no samples".into()));
    }
    let d = rows[0].len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(Error::Data("dataset CSV has ragged rows".into()));
    }
    if let Some(names) = &header {
        if names.len() != d {
            return Err(Error::Data(format!(
                "header has {} names but rows have {d} columns",
                names.len()
            )));
        }
    }
    // Transpose samples-as-rows into the d x n layout.
    let mut x = DenseMatrix::zeros(d, n);
    for (s, row) in rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            x.set(j, s, v);
        }
    }
    Ok((
        Dataset {
            d,
            n,
            x,
            noise_variance: None,
            source: DataSource::File(String::new()),
        },
        header,
    ))
}

/// Writes a dataset as CSV with one sample per row.
pub fn write_dataset_csv(
    ds: &Dataset,
    header: Option<&[String]>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = String::new();
    if let Some(names) = header {
        out.push_str(&names.join(","));
        out.push('\n');
    }
    for s in 0..ds.n {
        let row: Vec<String> = (0..ds.d).map(|j| format!("{}", ds.x.get(j, s))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path.as_ref(), out)
        .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))
}

fn split_fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}
