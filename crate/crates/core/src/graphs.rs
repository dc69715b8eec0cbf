//! Weighted directed graphs: the non-negative adjacency type, random DAG
//! generation, acyclicity testing, and thresholding.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Weighted adjacency matrix: square, entrywise non-negative, zero diagonal.
///
/// Entry `(i, j) > 0` encodes the edge `i -> j` with that weight. The
/// invariants are enforced at construction; all operations preserve them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    m: DenseMatrix,
}

impl WeightMatrix {
    /// Validates and wraps a square matrix as a weighted adjacency.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dimension(
                "square adjacency matrix",
                format!("{}x{}", m.rows(), m.cols()),
            ));
        }
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = m.get(i, j);
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if i == j && v != 0.0 {
                    return Err(Error::Config(format!(
                        "self-loop weight {v} at node {i}; the diagonal must be zero"
                    )));
                }
            }
        }
        Ok(Self { m })
    }

    /// Wraps a matrix whose invariants the caller has already established
    /// (e.g. the image of the solver's projection).
    pub(crate) fn from_validated(m: DenseMatrix) -> Self {
        debug_assert!(Self::new(m.clone()).is_ok());
        Self { m }
    }

    /// Edge-free graph on `d` nodes.
    pub fn zeros(d: usize) -> Self {
        Self {
            m: DenseMatrix::zeros(d, d),
        }
    }

    /// Number of nodes.
    pub fn d(&self) -> usize {
        self.m.rows()
    }

    /// The underlying matrix.
    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m.get(i, j)
    }

    /// Iterates over `(source, target, weight)` for every edge.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let d = self.d();
        (0..d).flat_map(move |i| {
            (0..d).filter_map(move |j| {
                let w = self.get(i, j);
                (w > 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Whether the support is a DAG, decided by depth-first search.
    pub fn is_acyclic(&self) -> bool {
        find_cycle(self).is_none()
    }

    /// Copy with every entry strictly below `tau` zeroed.
    pub fn threshold_support(&self, tau: f64) -> Self {
        Self {
            m: self.m.map(|v| if v < tau { 0.0 } else { v }),
        }
    }

    /// Serializes as `d` CSV rows of `d` decimal entries.
    pub fn to_csv_string(&self) -> String {
        let d = self.d();
        let mut out = String::new();
        for i in 0..d {
            let row: Vec<String> = self.m.row(i).iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Parses the format written by [`Self::to_csv_string`].
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<f64>> = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|_| {
                        Error::Data(format!("line {}: invalid number {tok:?}", lineno + 1))
                    })
                })
                .collect();
            rows.push(row?);
        }
        let d = rows.len();
        if d == 0 {
            return Err(Error::Data("empty adjacency CSV".into()));
        }
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::dimension(
                format!("{d} columns in each of {d} rows"),
                "ragged or non-square CSV".to_string(),
            ));
        }
        let m = DenseMatrix::from_vec(d, d, rows.into_iter().flatten().collect())?;
        Self::new(m)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_csv_string())
            .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| Error::Data(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_str(&text)
    }
}

/// Random-graph family for [`generate_dag`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphFamily {
    /// Erdos-Renyi: each pair admissible under the node ordering is an edge
    /// independently with fixed probability.
    #[serde(rename = "er", alias = "erdos-renyi")]
    ErdosRenyi,
    /// Scale-free: preferential attachment, producing heavy-tailed degrees.
    #[serde(rename = "sf", alias = "scale-free")]
    ScaleFree,
}

/// Specification of a random weighted DAG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DagSpec {
    /// Number of nodes.
    pub d: usize,
    pub family: GraphFamily,
    /// Target average total degree (in plus out), in `[0, d - 1]`.
    pub avg_degree: f64,
    /// Lower bound of the uniform edge-weight distribution; must be positive
    /// so that every edge is bounded away from zero.
    pub weight_low: f64,
    pub weight_high: f64,
    pub seed: u64,
}

impl DagSpec {
    /// Spec with the default edge-weight range `[0.5, 2.0]`.
    pub fn new(d: usize, family: GraphFamily, avg_degree: f64, seed: u64) -> Self {
        Self {
            d,
            family,
            avg_degree,
            weight_low: 0.5,
            weight_high: 2.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("graph must have at least one node".into()));
        }
        let max_degree = (self.d - 1) as f64;
        if !(0.0..=max_degree).contains(&self.avg_degree) {
            return Err(Error::Config(format!(
                "avg_degree {} outside [0, {max_degree}] for d = {}",
                self.avg_degree, self.d
            )));
        }
        if !(self.weight_low > 0.0) || self.weight_high < self.weight_low {
            return Err(Error::Config(format!(
                "weight range [{}, {}] must satisfy 0 < low <= high",
                self.weight_low, self.weight_high
            )));
        }
        Ok(())
    }
}

/// Samples a random weighted DAG.
///
/// A uniformly random permutation fixes the topological order. Under that
/// order, Erdos-Renyi includes each admissible pair independently with
/// probability `avg_degree / (d - 1)`, which makes the expected average
/// total degree equal `avg_degree`. Scale-free growth gives each arriving
/// node `round(avg_degree / 2)` out-links to predecessors drawn
/// proportionally to (links already received) + 1. Edge weights are uniform
/// on `[weight_low, weight_high]`.
pub fn generate_dag(spec: &DagSpec) -> Result<WeightMatrix> {
    spec.validate()?;
    let d = spec.d;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // order[k] = node occupying topological position k.
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(&mut rng);

    let mut m = DenseMatrix::zeros(d, d);
    let draw_weight =
        |rng: &mut ChaCha8Rng| rng.gen_range(spec.weight_low..=spec.weight_high);

    match spec.family {
        GraphFamily::ErdosRenyi => {
            if d >= 2 {
                let p = spec.avg_degree / (d - 1) as f64;
                for a in 0..d {
                    for b in a + 1..d {
                        if rng.gen::<f64>() < p {
                            let w = draw_weight(&mut rng);
                            m.set(order[a], order[b], w);
                        }
                    }
                }
            }
        }
        GraphFamily::ScaleFree => {
            let links = (spec.avg_degree / 2.0).round() as usize;
            // received[t] = links node t has attracted so far; +1 smoothing
            // lets nodes with none still be chosen.
            let mut received = vec![0usize; d];
            for k in 1..d {
                let take = links.min(k);
                let mut candidates: Vec<usize> = (0..k).collect();
                for _ in 0..take {
                    let total: f64 = candidates.iter().map(|&t| (received[t] + 1) as f64).sum();
                    let mut r = rng.gen::<f64>() * total;
                    let mut chosen = candidates.len() - 1;
                    for (idx, &t) in candidates.iter().enumerate() {
                        r -= (received[t] + 1) as f64;
                        if r < 0.0 {
                            chosen = idx;
                            break;
                        }
                    }
                    let t = candidates.swap_remove(chosen);
                    received[t] += 1;
                    let w = draw_weight(&mut rng);
                    // Arrival k cites predecessor t; arrival order reversed
                    // is a topological order, and the labels are shuffled.
                    m.set(order[k], order[t], w);
                }
            }
        }
    }
    Ok(WeightMatrix::from_validated(m))
}

/// Finds a directed cycle in the support, as a list of its edges.
pub(crate) fn find_cycle(w: &WeightMatrix) -> Option<Vec<(usize, usize)>> {
    let d = w.d();
    let adjacency: Vec<Vec<usize>> = (0..d)
        .map(|i| (0..d).filter(|&j| w.get(i, j) > 0.0).collect())
        .collect();

    const WHITE: u8 = 0;
    const GRAY: u8 = 1;
    const BLACK: u8 = 2;
    let mut color = vec![WHITE; d];
    let mut path: Vec<usize> = Vec::new();

    for start in 0..d {
        if color[start] != WHITE {
            continue;
        }
        // Stack of (node, index of the next child to visit).
        let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
        color[start] = GRAY;
        path.push(start);
        while let Some(top) = stack.last_mut() {
            let node = top.0;
            if top.1 < adjacency[node].len() {
                let child = adjacency[node][top.1];
                top.1 += 1;
                match color[child] {
                    WHITE => {
                        color[child] = GRAY;
                        path.push(child);
                        stack.push((child, 0));
                    }
                    GRAY => {
                        // Back edge: the cycle is the path suffix from
                        // `child` to `node`, closed by (node, child).
                        let from = path.iter().position(|&n| n == child).expect("on path");
                        let mut cycle: Vec<(usize, usize)> = path[from..]
                            .windows(2)
                            .map(|pair| (pair[0], pair[1]))
                            .collect();
                        cycle.push((node, child));
                        return Some(cycle);
                    }
                    _ => {}
                }
            } else {
                color[node] = BLACK;
                path.pop();
                stack.pop();
            }
        }
    }
    None
}

/// Deletes the lightest edge on some cycle until the support is acyclic.
pub(crate) fn make_acyclic_greedy(w: &WeightMatrix) -> WeightMatrix {
    let mut current = w.clone();
    while let Some(cycle) = find_cycle(&current) {
        let &(i, j) = cycle
            .iter()
            .min_by(|a, b| {
                current
                    .get(a.0, a.1)
                    .partial_cmp(&current.get(b.0, b.1))
                    .expect("finite weights")
            })
            .expect("cycle is non-empty");
        let mut m = current.m;
        m.set(i, j, 0.0);
        current = WeightMatrix { m };
    }
    current
}
