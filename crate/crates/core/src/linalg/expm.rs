//! Matrix exponential via scaling and squaring.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Truncation threshold for the Taylor core, relative to the running sum.
const TERM_TOL: f64 = 1e-19;

/// Hard cap on Taylor terms; with the scaled norm at or below 1/2 the series
/// reaches `TERM_TOL` in roughly thirty terms.
const MAX_TERMS: usize = 120;

/// Matrix exponential `e^m`.
///
/// The input is scaled by a power of two until its norm is at most 1/2, the
/// exponential of the scaled matrix is summed as a Taylor series, and the
/// result is squared back up. For a nilpotent input the scaled matrix is
/// still nilpotent, so the series terminates exactly once the powers vanish.
pub fn matrix_exponential(m: &DenseMatrix) -> Result<DenseMatrix> {
    assert!(m.is_square(), "matrix exponential requires a square matrix");
    let norm = m.inf_norm();
    if !norm.is_finite() {
        return Err(Error::Overflow("matrix_exponential input"));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.scale(0.5_f64.powi(squarings as i32));

    let mut sum = DenseMatrix::identity(m.rows()).add(&scaled);
    let mut term = scaled.clone();
    for k in 2..=MAX_TERMS {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
        if term.max_abs() <= TERM_TOL * sum.max_abs() {
            break;
        }
    }

    for _ in 0..squarings {
        sum = sum.matmul(&sum);
        if !sum.all_finite() {
            return Err(Error::Overflow("matrix_exponential squaring"));
        }
    }
    if !sum.all_finite() {
        return Err(Error::Overflow("matrix_exponential result"));
    }
    Ok(sum)
}
