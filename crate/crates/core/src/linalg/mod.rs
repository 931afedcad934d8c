//! Dense linear algebra sized for small control problems (n ≲ 50).

mod basis;
mod interval;
mod lyapunov;
mod matrix;
mod model;
mod svd;
mod sym;

pub use basis::{kron_basis, pack_upper, sym_basis, sym_basis_len, vec_to_sym};
pub use interval::{maximize_op, IntervalMatrix};
pub use lyapunov::{is_hurwitz, solve_lyapunov};
pub use matrix::Matrix;
pub use model::LinearModel;
pub use svd::{singular_values, spectral_norm};
pub use sym::{SymEigen, SymMatrix};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("closed-loop matrix is not Hurwitz; Lyapunov equation has no stabilizing solution")]
    NotHurwitz,
    #[error("interval halfwidths must be nonnegative")]
    NegativeHalfwidth,
    #[error("matrix dimension must be at least 1")]
    Empty,
}
