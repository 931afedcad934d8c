use alloc::vec;
use alloc::vec::Vec;

use super::CriticError;
use crate::linalg::{singular_values, Matrix};

/// Condition-number limit on the regressor matrix.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub w_hat: Vec<f64>,
    /// `‖Y − X·ŵ‖² / (N − p)`
    pub sigma2_hat: f64,
    /// Diagonal of `(XᵀX)⁻¹`.
    pub gram_inverse_diag: Vec<f64>,
}

/// Ordinary least squares by Householder QR. Requires `N ≥ p + 1` so the
/// residual variance has at least one degree of freedom.
pub fn least_squares(x: &Matrix, y: &[f64]) -> Result<LeastSquares, CriticError> {
    let (n_rows, p) = (x.rows(), x.cols());
    if y.len() != n_rows {
        return Err(CriticError::DimensionMismatch { expected: n_rows, found: y.len() });
    }
    if p == 0 {
        return Err(CriticError::InsufficientData { needed: 1, found: 0 });
    }
    if n_rows < p + 1 {
        return Err(CriticError::InsufficientData { needed: p + 1, found: n_rows });
    }

    let mut a = x.clone();
    let mut qty = y.to_vec();
    let mut v = vec![0.0; n_rows];
    for k in 0..p {
        let norm = libm::sqrt((k..n_rows).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[(k, k)] > 0.0 { -norm } else { norm };
        for i in k..n_rows {
            v[i] = a[(i, k)];
        }
        v[k] -= alpha;
        let vnorm2: f64 = (k..n_rows).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..p {
            let s: f64 = (k..n_rows).map(|i| v[i] * a[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..n_rows {
                a[(i, j)] -= s * v[i];
            }
        }
        let s: f64 = (k..n_rows).map(|i| v[i] * qty[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in k..n_rows {
            qty[i] -= s * v[i];
        }
    }
    let r = Matrix::from_fn(p, p, |i, j| if j >= i { a[(i, j)] } else { 0.0 });

    let sv = singular_values(&r);
    let (smax, smin) = (sv[0], sv[p - 1]);
    if !(smin > 0.0) || !(smax / smin <= MAX_CONDITION) {
        return Err(CriticError::Excitation { condition: if smin > 0.0 { smax / smin } else { f64::INFINITY } });
    }

    let mut w = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = qty[i] - ((i + 1)..p).map(|j| r[(i, j)] * w[j]).sum::<f64>();
        w[i] = s / r[(i, i)];
    }

    let fitted = x.mul_vec(&w);
    let rss: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b) * (a - b)).sum();
    let sigma2_hat = rss / (n_rows - p) as f64;

    // (XᵀX)⁻¹ = R⁻¹R⁻ᵀ, so τ_j is the squared norm of row j of R⁻¹
    let mut rinv = Matrix::zeros(p, p);
    for c in 0..p {
        for i in (0..=c).rev() {
            let rhs = if i == c { 1.0 } else { 0.0 };
            let s: f64 = rhs - ((i + 1)..=c).map(|j| r[(i, j)] * rinv[(j, c)]).sum::<f64>();
            rinv[(i, c)] = s / r[(i, i)];
        }
    }
    let gram_inverse_diag = (0..p).map(|j| rinv.row(j).iter().map(|v| v * v).sum()).collect();

    Ok(LeastSquares { w_hat: w, sigma2_hat, gram_inverse_diag })
}
