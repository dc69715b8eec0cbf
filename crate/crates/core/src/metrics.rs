//! Recovery metrics comparing an estimated graph against a ground truth.
//!
//! Two families of measures: a normalized squared weight error on the raw
//! matrices, and support metrics (structural Hamming distance, true positive
//! rate, false discovery rate, F1) on the directed edge sets. The support
//! metrics require both graphs to be acyclic so that edge direction is
//! meaningful.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::WeightMatrix;

/// Bundle of all recovery measures for one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    /// `||w_est - w_true||_F^2 / ||w_true||_F^2`.
    pub nerr: f64,
    /// Structural Hamming distance over unordered node pairs.
    pub shd: usize,
    /// `shd / d`, the per-node distance.
    pub shd_normalized: f64,
    pub tpr: f64,
    pub fdr: f64,
    pub f1: f64,
    /// Seconds attributed to producing the estimate; filled by callers.
    pub wall_time: f64,
}

/// Normalized squared weight error.
///
/// Fails with [`Error::DegenerateTruth`] when the reference has no edges,
/// since the ratio is undefined there.
pub fn nerr(w_est: &WeightMatrix, w_true: &WeightMatrix) -> Result<f64> {
    if w_est.d() != w_true.d() {
        return Err(Error::dimension(
            format!("{0}x{0} estimate", w_true.d()),
            format!("{0}x{0}", w_est.d()),
        ));
    }
    let denom = w_true.matrix().frobenius_norm();
    if denom == 0.0 {
        return Err(Error::DegenerateTruth);
    }
    let diff = w_est.matrix() - w_true.matrix();
    let num = diff.frobenius_norm();
    Ok((num / denom) * (num / denom))
}

/// Edge status between an unordered node pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairStatus {
    None,
    Forward,
    Reverse,
}

fn pair_status(w: &WeightMatrix, a: usize, b: usize) -> PairStatus {
    // Acyclicity rules out having both directions at once.
    if w.get(a, b) != 0.0 {
        PairStatus::Forward
    } else if w.get(b, a) != 0.0 {
        PairStatus::Reverse
    } else {
        PairStatus::None
    }
}

fn require_comparable(w_est: &WeightMatrix, w_true: &WeightMatrix) -> Result<()> {
    if w_est.d() != w_true.d() {
        return Err(Error::dimension(
            format!("{0}x{0} estimate", w_true.d()),
            format!("{0}x{0}", w_est.d()),
        ));
    }
    if !w_est.is_acyclic() || !w_true.is_acyclic() {
        return Err(Error::Cyclic);
    }
    Ok(())
}

/// Structural Hamming distance: one unit per unordered pair whose status
/// (absent, one direction, the other) differs. A reversed edge costs one.
pub fn shd(w_est: &WeightMatrix, w_true: &WeightMatrix) -> Result<usize> {
    require_comparable(w_est, w_true)?;
    let d = w_true.d();
    let mut count = 0;
    for a in 0..d {
        for b in (a + 1)..d {
            if pair_status(w_est, a, b) != pair_status(w_true, a, b) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Directed-edge confusion counts. A reversed edge is a false positive for
/// the estimate and a false negative for the missed true direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

pub fn confusion_counts(w_est: &WeightMatrix, w_true: &WeightMatrix) -> Result<ConfusionCounts> {
    require_comparable(w_est, w_true)?;
    let d = w_true.d();
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let est = w_est.get(i, j) != 0.0;
            let tru = w_true.get(i, j) != 0.0;
            match (est, tru) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    Ok(ConfusionCounts { tp, fp, fn_ })
}

/// `(tpr, fdr, f1)` from the directed-edge confusion, with the undefined
/// zero-over-zero cases pinned to 0.
pub fn support_confusion(
    w_est: &WeightMatrix,
    w_true: &WeightMatrix,
) -> Result<(f64, f64, f64)> {
    let ConfusionCounts { tp, fp, fn_ } = confusion_counts(w_est, w_true)?;
    let tpr = if tp + fn_ == 0 {
        0.0
    } else {
        tp as f64 / (tp + fn_) as f64
    };
    let fdr = fp as f64 / (tp + fp).max(1) as f64;
    let f1_denom = 2 * tp + fp + fn_;
    let f1 = if f1_denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / f1_denom as f64
    };
    Ok((tpr, fdr, f1))
}

/// All measures at once. `wall_time` is reported as given.
pub fn evaluate(
    w_raw: &WeightMatrix,
    w_dag: &WeightMatrix,
    w_true: &WeightMatrix,
    wall_time: f64,
) -> Result<MetricsReport> {
    let nerr = nerr(w_raw, w_true)?;
    let shd = shd(w_dag, w_true)?;
    let (tpr, fdr, f1) = support_confusion(w_dag, w_true)?;
    Ok(MetricsReport {
        nerr,
        shd,
        shd_normalized: shd as f64 / w_true.d() as f64,
        tpr,
        fdr,
        f1,
        wall_time,
    })
}
