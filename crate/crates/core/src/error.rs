//! Error type shared by every module in this crate.

use thiserror::Error;

/// Crate-wide error enum.
///
/// Numerical routines return [`Error`] instead of panicking so that callers
/// (line searches, experiment drivers) can react to recoverable conditions
/// such as a singular factorization or an iterate that left the feasible
/// domain.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A factorization found the matrix singular, or its determinant is not
    /// strictly positive where positivity is required.
    #[error("matrix is singular or its determinant is not positive")]
    Singular,

    /// A floating-point overflow or non-finite intermediate in `{0}`.
    #[error("floating-point overflow in {0}")]
    Overflow(&'static str),

    /// Operand shapes do not match.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    /// An entry required to be non-negative is negative.
    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    /// A matrix whose support must be acyclic contains a directed cycle.
    #[error("matrix support contains a directed cycle")]
    Cyclic,

    /// An iterate left the domain on which the acyclicity function is defined.
    #[error("iterate is outside the acyclicity domain")]
    OutOfDomain,

    /// Backtracking reduced the step size below the representable floor
    /// without finding an acceptable step.
    #[error("line search stalled: step size underflow")]
    LineSearchStall,

    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Random sampling could not produce a point satisfying its constraints.
    #[error("sampling failed: {0}")]
    Sampling(String),

    /// The ground-truth matrix is identically zero, so relative error is
    /// undefined.
    #[error("ground-truth matrix has zero norm")]
    DegenerateTruth,

    /// Malformed or inconsistent external data.
    #[error("data error: {0}")]
    Data(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a dimension-mismatch error.
    pub fn dimension(expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::Dimension {
            expected: expected.into(),
            got: got.into(),
        }
    }
}
