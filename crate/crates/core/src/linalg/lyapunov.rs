use super::{LinalgError, Matrix, SymMatrix};

/// Solves `P·A + Aᵀ·P = −Q` for Hurwitz `A` through the vectorised system
/// `(Aᵀ ⊗ I + I ⊗ Aᵀ)·vec(P) = −vec(Q)`.
pub fn solve_lyapunov(a: &Matrix, q: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if q.dim() != a.rows() {
        return Err(LinalgError::DimensionMismatch { expected: a.rows(), found: q.dim() });
    }
    if !is_hurwitz(a)? {
        return Err(LinalgError::NotHurwitz);
    }
    kronecker_solve(a, q)
}

/// Hurwitz test: `A` is Hurwitz iff `P·A + Aᵀ·P = −I` has a positive definite solution.
pub fn is_hurwitz(a: &Matrix) -> Result<bool, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    match kronecker_solve(a, &SymMatrix::identity(a.rows())) {
        Ok(p) => Ok(p.is_positive_definite()),
        Err(LinalgError::Singular) => Ok(false),
        Err(e) => Err(e),
    }
}

fn kronecker_solve(a: &Matrix, q: &SymMatrix) -> Result<SymMatrix, LinalgError> {
    let n = a.rows();
    let at = a.transpose();
    let eye = Matrix::identity(n);
    let lhs = &at.kron(&eye) + &eye.kron(&at);
    let rhs = Matrix::column_vector(&q.vec()).scale(-1.0);
    let sol = lhs.solve(&rhs)?;
    let p = Matrix::from_fn(n, n, |i, j| sol[(j * n + i, 0)]);
    SymMatrix::from_matrix(p)
}
