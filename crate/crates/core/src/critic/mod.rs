//! Value-kernel estimation from closed-loop trajectory windows.
//!
//! Each window `[t, t+T]` contributes one regression row
//! `φ(x(t)) − φ(x(t+T))` against the accumulated cost over the window, where
//! `φ` is the reduced quadratic basis. Least squares gives the kernel `P̂` and
//! per-coefficient confidence halfwidths.

mod lsq;
mod quantile;

pub use lsq::{least_squares, LeastSquares, MAX_CONDITION};
pub use quantile::{normal_cdf, normal_quantile};

use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{spectral_norm, sym_basis, sym_basis_len, vec_to_sym, IntervalMatrix, LinalgError, Matrix, SymMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriticError {
    #[error("insufficient data: need at least {needed}, got {found}")]
    InsufficientData { needed: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("regressors are not exciting enough (condition number {condition:e})")]
    Excitation { condition: f64 },
    #[error("probability {0} is outside (0, 1)")]
    QuantileDomain(f64),
    #[error("confidence level theta = {0} is outside (0, 1)")]
    InvalidTheta(f64),
    #[error("estimated kernel is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One sampling window.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionSample {
    /// Window start (min).
    pub t: f64,
    pub x_start: Vec<f64>,
    pub x_end: Vec<f64>,
    /// Cost accumulated over the window.
    pub d: f64,
}

/// A state/input record inside a sampling window.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueEstimate {
    /// Upper-triangle coefficients of `P̂`.
    pub w_hat: Vec<f64>,
    /// Confidence halfwidth of each coefficient.
    pub delta_w: Vec<f64>,
    pub p_hat: SymMatrix,
    /// Interval around `P̂` with the unpacked halfwidths.
    pub delta_p: IntervalMatrix,
    /// Bound on `‖ΔP‖₂` over the interval.
    pub beta: f64,
    pub sigma2_hat: f64,
    pub sample_count: usize,
    pub confidence_theta: f64,
}

/// Trapezoidal integral of `xᵀQx + uᵀRu` over the records.
pub fn accumulate_cost(trajectory: &[TrajectoryPoint], q: &SymMatrix, r: &SymMatrix) -> Result<f64, CriticError> {
    if trajectory.len() < 2 {
        return Err(CriticError::InsufficientData { needed: 2, found: trajectory.len() });
    }
    for p in trajectory {
        if p.x.len() != q.dim() {
            return Err(CriticError::DimensionMismatch { expected: q.dim(), found: p.x.len() });
        }
        if p.u.len() != r.dim() {
            return Err(CriticError::DimensionMismatch { expected: r.dim(), found: p.u.len() });
        }
    }
    let integrand = |p: &TrajectoryPoint| q.quad_form(&p.x) + r.quad_form(&p.u);
    let total: f64 = trajectory
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (integrand(&w[0]) + integrand(&w[1])))
        .sum();
    Ok(total.max(0.0))
}

/// Rows `φ(x_start) − φ(x_end)` and targets `d`.
pub fn build_regression(samples: &[TransitionSample]) -> Result<(Matrix, Vec<f64>), CriticError> {
    let first = samples.first().ok_or(CriticError::InsufficientData { needed: 1, found: 0 })?;
    let n = first.x_start.len();
    let p = sym_basis_len(n);
    let mut data = Vec::with_capacity(samples.len() * p);
    for s in samples {
        for x in [&s.x_start, &s.x_end] {
            if x.len() != n {
                return Err(CriticError::DimensionMismatch { expected: n, found: x.len() });
            }
        }
        let a = sym_basis(&s.x_start);
        let b = sym_basis(&s.x_end);
        data.extend(a.iter().zip(&b).map(|(u, v)| u - v));
    }
    let x = Matrix::from_vec(samples.len(), p, data)?;
    Ok((x, samples.iter().map(|s| s.d).collect()))
}

/// `q_{1−θ/2}·sqrt(τ_j·σ̂²)` for every coefficient.
pub fn coefficient_halfwidths(tau: &[f64], sigma2_hat: f64, theta: f64) -> Result<Vec<f64>, CriticError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(CriticError::InvalidTheta(theta));
    }
    let q = normal_quantile(1.0 - 0.5 * theta)?;
    Ok(tau.iter().map(|t| q * libm::sqrt((t * sigma2_hat).max(0.0))).collect())
}

/// Spectral norm of the halfwidth matrix; dominates `‖Δ‖₂` for every `Δ`
/// inside the deviation interval.
pub fn beta_bound(delta_p: &IntervalMatrix) -> f64 {
    spectral_norm(delta_p.halfwidth().as_matrix())
}

/// Fits `P̂` to the samples and attaches confidence intervals at level
/// `1 − theta`. Rejects kernels that are not positive definite.
pub fn estimate_value(samples: &[TransitionSample], theta: f64) -> Result<ValueEstimate, CriticError> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(CriticError::InvalidTheta(theta));
    }
    let (x, y) = build_regression(samples)?;
    let n = samples[0].x_start.len();
    let ls = least_squares(&x, &y)?;
    let delta_w = coefficient_halfwidths(&ls.gram_inverse_diag, ls.sigma2_hat, theta)?;
    let p_hat = vec_to_sym(&ls.w_hat, n)?;
    let min_eigenvalue = p_hat.min_eigenvalue();
    if !(min_eigenvalue > 0.0) {
        return Err(CriticError::NotPositiveDefinite { min_eigenvalue });
    }
    let delta_p = IntervalMatrix::new(p_hat.clone(), vec_to_sym(&delta_w, n)?)?;
    let beta = beta_bound(&delta_p);
    Ok(ValueEstimate {
        w_hat: ls.w_hat,
        delta_w,
        p_hat,
        delta_p,
        beta,
        sigma2_hat: ls.sigma2_hat,
        sample_count: samples.len(),
        confidence_theta: theta,
    })
}

/// `x_startᵀPx_start − d − x_endᵀPx_end`; zero when `P` is the exact kernel.
pub fn bellman_residual(p: &SymMatrix, sample: &TransitionSample) -> f64 {
    p.quad_form(&sample.x_start) - sample.d - p.quad_form(&sample.x_end)
}
