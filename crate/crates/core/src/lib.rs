//! Learning non-negative directed acyclic graphs from linear
//! structural-equation data.
//!
//! The crate estimates a weighted adjacency matrix `W >= 0` whose support is
//! a DAG from observations of `x = W^T x + z`. Acyclicity is imposed through
//! a smooth non-negativity-aware function that vanishes exactly on DAGs, and
//! the constrained program is solved with an augmented Lagrangian driven by
//! projected gradient steps. A separate module certifies, numerically, the
//! benign shape of the population-level optimization landscape that makes
//! this reliable.
//!
//! Module map:
//!
//! - [`linalg`]: dense matrix kernels (log-det, inverse, spectral radius,
//!   matrix exponential).
//! - [`graphs`]: weighted DAGs, random generation, acyclicity testing,
//!   thresholding, CSV round-trips.
//! - [`sem`]: linear SEM simulation and sample/population covariances.
//! - [`acyclicity`]: smooth acyclicity functions with gradients.
//! - [`solver`]: augmented Lagrangian / method of multipliers with projected
//!   gradient or FISTA inner iterations.
//! - [`landscape`]: population-level optimality and uniqueness checks.
//! - [`metrics`]: structure-recovery metrics (relative error, SHD, confusion
//!   counts).

pub mod acyclicity;
pub mod error;
pub mod graphs;
pub mod landscape;
pub mod linalg;
pub mod metrics;
pub mod sem;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::DenseMatrix;
pub use graphs::WeightMatrix;
