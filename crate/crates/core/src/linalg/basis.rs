//! Quadratic bases for the value kernel.
//!
//! The reduced basis orders monomials along the upper triangle, row by row:
//! for `n = 2` it is `(x₁², 2x₁x₂, x₂²)`. Its coefficient vector is the upper
//! triangle of `P` in the same order ([`pack_upper`]), so
//! `pack_upper(P)·sym_basis(x) = xᵀPx`.

use alloc::vec::Vec;

use super::{LinalgError, Matrix, SymMatrix};

/// `x ⊗ x`; element `i·n + j` is `x_i·x_j`.
pub fn kron_basis(x: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len() * x.len());
    for &xi in x {
        for &xj in x {
            out.push(xi * xj);
        }
    }
    out
}

pub fn sym_basis_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Upper-triangle monomials, off-diagonal terms doubled.
pub fn sym_basis(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(sym_basis_len(n));
    for i in 0..n {
        out.push(x[i] * x[i]);
        for j in (i + 1)..n {
            out.push(2.0 * x[i] * x[j]);
        }
    }
    out
}

/// Row-by-row upper triangle of `p`, matching the order of [`sym_basis`].
pub fn pack_upper(p: &SymMatrix) -> Vec<f64> {
    let n = p.dim();
    let mut out = Vec::with_capacity(sym_basis_len(n));
    for i in 0..n {
        for j in i..n {
            out.push(p[(i, j)]);
        }
    }
    out
}

/// Rebuilds an `n×n` kernel from either a full column-stacked `vec(P)` of
/// length `n²` (symmetrised as `(P + Pᵀ)/2`) or an upper-triangle packing of
/// length `n(n+1)/2`.
pub fn vec_to_sym(w: &[f64], n: usize) -> Result<SymMatrix, LinalgError> {
    if n == 0 {
        return Err(LinalgError::Empty);
    }
    if w.len() == n * n {
        // column-major reshape
        let m = Matrix::from_fn(n, n, |i, j| w[j * n + i]);
        return SymMatrix::from_matrix(m);
    }
    if w.len() == sym_basis_len(n) {
        let mut idx = 0;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                m[(i, j)] = w[idx];
                m[(j, i)] = w[idx];
                idx += 1;
            }
        }
        return SymMatrix::from_matrix(m);
    }
    Err(LinalgError::DimensionMismatch { expected: sym_basis_len(n), found: w.len() })
}
