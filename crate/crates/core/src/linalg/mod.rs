//! Dense real-matrix kernels used by every other module.
//!
//! The value type is [`DenseMatrix`]; the kernels are pure functions over it:
//!
//! - [`log_det`] / [`inverse`] / [`inverse_transpose`] via pivoted LU with an
//!   explicitly tracked determinant sign,
//! - [`spectral_radius_nonneg`] via power iteration tailored to non-negative
//!   (possibly reducible or nilpotent) matrices,
//! - [`matrix_exponential`] via scaling and squaring.
//!
//! Everything is plain `f64` at the problem sizes this crate targets
//! (hundreds of nodes); there is no BLAS backend.

mod expm;
mod factor;
mod matrix;
mod spectral;

pub use expm::matrix_exponential;
pub use factor::{inverse, inverse_transpose, log_det};
pub(crate) use factor::{mmatrix_logdet_inv_t, solve_system};
pub use matrix::DenseMatrix;
pub use spectral::spectral_radius_nonneg;
