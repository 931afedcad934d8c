use super::{LinalgError, Matrix};

/// `ẋ = A·x + B·u`. The controller never reads `a`; it is only used by test
/// oracles and plant linearisation.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearModel {
    pub a: Matrix,
    pub b: Matrix,
}

impl LinearModel {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        if b.rows() != a.rows() {
            return Err(LinalgError::DimensionMismatch { expected: a.rows(), found: b.rows() });
        }
        Ok(Self { a, b })
    }

    pub fn states(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    /// `A − B·K` for the feedback `u = −K·x`.
    pub fn closed_loop(&self, k: &Matrix) -> Result<Matrix, LinalgError> {
        Ok(&self.a - &self.b.matmul(k)?)
    }

    /// `A·x + B·u`
    pub fn derivative(&self, x: &[f64], u: &[f64]) -> alloc::vec::Vec<f64> {
        let ax = self.a.mul_vec(x);
        let bu = self.b.mul_vec(u);
        ax.iter().zip(&bu).map(|(p, q)| p + q).collect()
    }
}
