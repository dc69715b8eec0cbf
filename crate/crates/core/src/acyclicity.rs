//! Smooth acyclicity functions on the non-negative cone.
//!
//! Both functions are non-negative on their domain and vanish exactly on
//! matrices whose support is a DAG, which lets a smooth solver impose
//! acyclicity as the single scalar constraint `h(W) = 0`.
//!
//! The primary function is the log-determinant form
//!
//! ```text
//! h(W) = d log s - log det(sI - W),      gradient (sI - W)^{-T},
//! ```
//!
//! defined on `{W >= 0 : spectral_radius(W) < s}`. On that domain
//! `det(sI - W) in (0, s^d]`, so `h >= 0` with equality exactly on DAGs, and
//! `h` blows up at the domain boundary, acting as a barrier. A trace
//! exponential variant `h(W) = tr(e^W) - d` with gradient `(e^W)^T` is
//! provided for comparison; it is defined for every non-negative matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::WeightMatrix;
use crate::linalg::{self, DenseMatrix};

/// Choice of smooth acyclicity function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AcyclicityKind {
    /// `h(W) = d log s - log det(sI - W)` on `{W >= 0 : rho(W) < s}`.
    LogDet { s: f64 },
    /// `h(W) = tr(e^W) - d`, defined on the whole non-negative cone.
    MatExp,
}

impl Default for AcyclicityKind {
    fn default() -> Self {
        AcyclicityKind::LogDet { s: 1.0 }
    }
}

/// Value and gradient of an acyclicity function at a point in its domain.
#[derive(Debug, Clone, PartialEq)]
pub struct AcyclicityEval {
    pub value: f64,
    pub gradient: DenseMatrix,
}

/// Evaluates the chosen function; `Ok(None)` means the point is outside the
/// function's domain (only possible for the log-det form).
pub fn eval(kind: AcyclicityKind, w: &DenseMatrix) -> Result<Option<AcyclicityEval>> {
    match kind {
        AcyclicityKind::LogDet { s } => eval_logdet(w, s),
        AcyclicityKind::MatExp => eval_matexp(w).map(Some),
    }
}

/// Log-determinant acyclicity value and gradient from a single elimination
/// of `sI - w`. The elimination doubles as the domain test: for `w >= 0` the
/// matrix `sI - w` has positive pivots throughout exactly when
/// `rho(w) < s`.
pub fn eval_logdet(w: &DenseMatrix, s: f64) -> Result<Option<AcyclicityEval>> {
    validate_nonneg_square(w)?;
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Config(format!("log-det scale must be positive, got {s}")));
    }
    let d = w.rows();
    let a = DenseMatrix::from_fn(d, d, |i, j| {
        let shift = if i == j { s } else { 0.0 };
        shift - w.get(i, j)
    });
    match linalg::mmatrix_logdet_inv_t(&a) {
        None => Ok(None),
        Some((log_det, inv_t)) => Ok(Some(AcyclicityEval {
            value: d as f64 * s.ln() - log_det,
            gradient: inv_t,
        })),
    }
}

/// Trace-exponential acyclicity value and gradient.
pub fn eval_matexp(w: &DenseMatrix) -> Result<AcyclicityEval> {
    validate_nonneg_square(w)?;
    let e = linalg::matrix_exponential(w)?;
    Ok(AcyclicityEval {
        value: e.trace() - w.rows() as f64,
        gradient: e.transpose(),
    })
}

/// Domain membership of a weighted adjacency for the chosen function.
pub fn check_domain(kind: AcyclicityKind, w: &WeightMatrix) -> bool {
    match kind {
        AcyclicityKind::LogDet { s } => linalg::spectral_radius_nonneg(w.matrix()) < s,
        AcyclicityKind::MatExp => true,
    }
}

/// Value-only evaluation, skipping the gradient's extra solves; used by line
/// searches that only compare objectives.
pub(crate) fn eval_value(kind: AcyclicityKind, w: &DenseMatrix) -> Result<Option<f64>> {
    match kind {
        AcyclicityKind::LogDet { s } => {
            validate_nonneg_square(w)?;
            let d = w.rows();
            let a = DenseMatrix::from_fn(d, d, |i, j| {
                let shift = if i == j { s } else { 0.0 };
                shift - w.get(i, j)
            });
            Ok(logdet_mmatrix_value(&a).map(|ld| d as f64 * s.ln() - ld))
        }
        AcyclicityKind::MatExp => eval_matexp(w).map(|e| Some(e.value)),
    }
}

/// Unpivoted elimination returning `log det a`, or `None` when a pivot is
/// not strictly positive (point outside the domain).
fn logdet_mmatrix_value(a: &DenseMatrix) -> Option<f64> {
    let d = a.rows();
    let mut lu = a.as_slice().to_vec();
    let mut log_det = 0.0;
    for k in 0..d {
        let (done, active) = lu.split_at_mut((k + 1) * d);
        let row_k = &done[k * d..];
        let pivot = row_k[k];
        if pivot <= 0.0 || !pivot.is_finite() {
            return None;
        }
        log_det += pivot.ln();
        let row_k_right = &row_k[k + 1..];
        for row in active.chunks_exact_mut(d) {
            // Subdiagonal zeros are common here (sparse weights) and
            // contribute nothing.
            if row[k] == 0.0 {
                continue;
            }
            let factor = row[k] / pivot;
            for (x, y) in row[k + 1..].iter_mut().zip(row_k_right) {
                *x -= factor * y;
            }
        }
    }
    log_det.is_finite().then_some(log_det)
}

fn validate_nonneg_square(w: &DenseMatrix) -> Result<()> {
    if !w.is_square() {
        return Err(Error::dimension(
            "square matrix",
            format!("{}x{}", w.rows(), w.cols()),
        ));
    }
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            let v = w.get(i, j);
            if v < 0.0 || !v.is_finite() {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(())
}
