//! Spectral radius of entrywise non-negative matrices.

use crate::linalg::DenseMatrix;

/// Relative width at which the Collatz-Wielandt bracket is considered
/// converged.
const REL_TOL: f64 = 1e-8;

/// Rank-one shift applied to guarantee a primitive iteration matrix.
const SHIFT: f64 = 1e-12;

/// Spectral radius of a square matrix with non-negative entries.
///
/// Runs power iteration from the all-ones vector. Two details make this
/// reliable on the reducible matrices that arise from graphs:
///
/// - Nilpotent inputs are detected exactly: the iterate `m^k * 1` vanishes
///   identically within `d` steps precisely when the support is acyclic, in
///   which case the radius is zero.
/// - Otherwise the iteration runs on `m + SHIFT * ones * ones^T`, which is
///   primitive, so the Collatz-Wielandt ratios bracket the dominant
///   eigenvalue and the bracket contracts. Convergence is declared at
///   relative width [`REL_TOL`], or the iteration cap returns the current
///   upper bound.
pub fn spectral_radius_nonneg(m: &DenseMatrix) -> f64 {
    assert!(m.is_square(), "spectral radius requires a square matrix");
    debug_assert!(
        m.as_slice().iter().all(|&v| v >= 0.0),
        "spectral_radius_nonneg requires non-negative entries"
    );
    let d = m.rows();

    // Nilpotency check: with v0 = 1 > 0 and m >= 0, m^k v0 = 0 forces
    // m^k = 0. The zero pattern propagates exactly in floating point.
    let mut v = vec![1.0; d];
    for _ in 0..d {
        v = m.matvec(&v);
        let max = v.iter().fold(0.0, |a: f64, &b| a.max(b));
        if max == 0.0 {
            return 0.0;
        }
        for e in &mut v {
            *e /= max;
        }
    }

    // One shifted step makes the vector strictly positive.
    let mut v = shifted_step(m, &v);
    normalize(&mut v);

    let cap = 200 * d + 5_000;
    let mut upper = f64::INFINITY;
    for _ in 0..cap {
        let w = shifted_step(m, &v);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0_f64;
        for (wi, vi) in w.iter().zip(&v) {
            let ratio = wi / vi;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        upper = hi;
        if hi - lo <= REL_TOL * hi.max(f64::MIN_POSITIVE) {
            return hi;
        }
        v = w;
        normalize(&mut v);
    }
    upper
}

fn shifted_step(m: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    let mut w = m.matvec(v);
    for e in &mut w {
        *e += SHIFT * sum;
    }
    w
}

fn normalize(v: &mut [f64]) {
    let max = v.iter().fold(0.0, |a: f64, &b| a.max(b));
    for e in v.iter_mut() {
        *e /= max;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_cycle_has_radius_equal_to_geometric_mean() {
        let m = DenseMatrix::from_vec(2, 2, vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        assert!((spectral_radius_nonneg(&m) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn diagonal_matrix_returns_largest_entry() {
        let m = DenseMatrix::from_vec(2, 2, vec![0.3, 0.0, 0.0, 0.9]).unwrap();
        assert!((spectral_radius_nonneg(&m) - 0.9).abs() < 1e-8);
    }

    #[test]
    fn strictly_triangular_matrix_is_recognized_as_nilpotent() {
        let m = DenseMatrix::from_fn(4, 4, |i, j| if j > i { 2.0 } else { 0.0 });
        assert!(spectral_radius_nonneg(&m) <= 1e-8);
    }

    #[test]
    fn reducible_block_matrix_picks_the_dominant_block() {
        // Blocks: a 2-cycle with radius 0.8 and an isolated chain (radius 0).
        let mut entries = vec![0.0; 25];
        entries[1] = 0.8; // (0, 1)
        entries[5] = 0.8; // (1, 0)
        entries[2 * 5 + 3] = 3.0; // chain 2 -> 3
        entries[3 * 5 + 4] = 3.0; // chain 3 -> 4
        let m = DenseMatrix::from_vec(5, 5, entries).unwrap();
        assert!((spectral_radius_nonneg(&m) - 0.8).abs() < 1e-6);
    }
}
