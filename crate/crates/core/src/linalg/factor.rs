//! LU-based kernels: log-determinant, inverse, inverse-transpose.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Packed LU factorization with partial pivoting, `P * m = L * U`.
struct Lu {
    /// L (unit diagonal, below) and U (on and above) packed row-major.
    lu: Vec<f64>,
    /// `perm[i]` = source row of permuted row `i`.
    perm: Vec<usize>,
    /// Number of row transpositions performed.
    swaps: usize,
    d: usize,
}

fn lu_factor(m: &DenseMatrix) -> Result<Lu> {
    assert!(m.is_square(), "LU factorization requires a square matrix");
    let d = m.rows();
    let mut lu = m.as_slice().to_vec();
    let mut perm: Vec<usize> = (0..d).collect();
    let mut swaps = 0;
    for k in 0..d {
        let pivot_row = (k..d)
            .max_by(|&a, &b| {
                lu[a * d + k]
                    .abs()
                    .partial_cmp(&lu[b * d + k].abs())
                    .expect("pivot comparison saw NaN")
            })
            .expect("non-empty pivot range");
        let pivot = lu[pivot_row * d + k];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular);
        }
        if pivot_row != k {
            for j in 0..d {
                lu.swap(k * d + j, pivot_row * d + j);
            }
            perm.swap(k, pivot_row);
            swaps += 1;
        }
        for i in k + 1..d {
            let factor = lu[i * d + k] / pivot;
            lu[i * d + k] = factor;
            for j in k + 1..d {
                lu[i * d + j] -= factor * lu[k * d + j];
            }
        }
    }
    Ok(Lu { lu, perm, swaps, d })
}

impl Lu {
    /// Sign of the determinant and log of its absolute value.
    fn signed_log_det(&self) -> (f64, f64) {
        let mut sign = if self.swaps % 2 == 0 { 1.0 } else { -1.0 };
        let mut log_abs = 0.0;
        for k in 0..self.d {
            let u = self.lu[k * self.d + k];
            if u < 0.0 {
                sign = -sign;
            }
            log_abs += u.abs().ln();
        }
        (sign, log_abs)
    }

    /// Solves in place for one right-hand side already permuted into `b`.
    fn solve_permuted(&self, b: &mut [f64]) {
        let d = self.d;
        for i in 1..d {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.lu[i * d + j] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..d).rev() {
            let mut acc = b[i];
            for j in i + 1..d {
                acc -= self.lu[i * d + j] * b[j];
            }
            b[i] = acc / self.lu[i * d + i];
        }
    }

    fn inverse(&self) -> DenseMatrix {
        let d = self.d;
        let mut inv = DenseMatrix::zeros(d, d);
        let mut col = vec![0.0; d];
        for j in 0..d {
            for (i, c) in col.iter_mut().enumerate() {
                *c = if self.perm[i] == j { 1.0 } else { 0.0 };
            }
            self.solve_permuted(&mut col);
            for i in 0..d {
                inv.set(i, j, col[i]);
            }
        }
        inv
    }
}

/// Log-determinant of a square matrix with strictly positive determinant.
///
/// The sign is tracked explicitly through the pivoted factorization; a
/// negative or vanishing determinant is reported as [`Error::Singular`]
/// rather than returning the log of an absolute value.
pub fn log_det(m: &DenseMatrix) -> Result<f64> {
    let lu = lu_factor(m)?;
    let (sign, log_abs) = lu.signed_log_det();
    if sign <= 0.0 || !log_abs.is_finite() {
        return Err(Error::Singular);
    }
    Ok(log_abs)
}

/// Matrix inverse via the pivoted factorization.
pub fn inverse(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(lu_factor(m)?.inverse())
}

/// `(m^{-1})^T`, the transpose of the inverse.
pub fn inverse_transpose(m: &DenseMatrix) -> Result<DenseMatrix> {
    Ok(inverse(m)?.transpose())
}

/// Solves `m x = b` for one right-hand side via the pivoted factorization.
///
/// Two rounds of iterative refinement keep the residual near machine level
/// even for poorly conditioned systems, where a single triangular solve
/// can lose eight digits.
pub(crate) fn solve_system(m: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let lu = lu_factor(m)?;
    let d = lu.d;
    assert_eq!(b.len(), d, "right-hand side length must match the matrix");
    let apply = |lu: &Lu, rhs: &[f64]| {
        let mut x = vec![0.0; d];
        for i in 0..d {
            x[i] = rhs[lu.perm[i]];
        }
        lu.solve_permuted(&mut x);
        x
    };
    let mut x = apply(&lu, b);
    for _ in 0..2 {
        let mut r = b.to_vec();
        for i in 0..d {
            for j in 0..d {
                r[i] -= m.get(i, j) * x[j];
            }
        }
        let delta = apply(&lu, &r);
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(x)
}

/// Elimination without pivoting, specialized to `a = s*I - W` with `W >= 0`.
///
/// Such an `a` has non-positive off-diagonal entries, and for this class all
/// elimination pivots are strictly positive exactly when the spectral radius
/// of `W` is below `s` (equivalently, `a` is a nonsingular M-matrix). One
/// elimination therefore decides domain membership and, inside the domain,
/// yields both `log det a` and `a^{-T}`.
///
/// Returns `None` when a pivot fails to be strictly positive, i.e. when the
/// point is outside the domain.
pub(crate) fn mmatrix_logdet_inv_t(a: &DenseMatrix) -> Option<(f64, DenseMatrix)> {
    debug_assert!(a.is_square());
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
            row[k] = factor;
            for (x, y) in row[k + 1..].iter_mut().zip(row_k_right) {
                *x -= factor * y;
            }
        }
    }

    // Invert from the factorization by solving for all columns at once, in
    // place on an identity buffer: rows of the forward then backward solve
    // combine whole rows of the running solution, which keeps the inner
    // loops on contiguous slices.
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    for i in 1..d {
        let (prev, rest) = inv.split_at_mut(i * d);
        let row_i = &mut rest[..d];
        for (j, factor) in lu[i * d..i * d + i].iter().enumerate() {
            if *factor == 0.0 {
                continue;
            }
            for (x, y) in row_i.iter_mut().zip(&prev[j * d..(j + 1) * d]) {
                *x -= factor * y;
            }
        }
    }
    for i in (0..d).rev() {
        let (head, tail) = inv.split_at_mut((i + 1) * d);
        let row_i = &mut head[i * d..];
        for (jj, factor) in lu[i * d + i + 1..(i + 1) * d].iter().enumerate() {
            if *factor == 0.0 {
                continue;
            }
            for (x, y) in row_i.iter_mut().zip(&tail[jj * d..(jj + 1) * d]) {
                *x -= factor * y;
            }
        }
        let div = lu[i * d + i];
        for x in row_i.iter_mut() {
            *x /= div;
        }
    }
    let inv_t = DenseMatrix::from_fn(d, d, |i, j| inv[j * d + i]);
    if !log_det.is_finite() || !inv_t.all_finite() {
        return None;
    }
    Some((log_det, inv_t))
}
