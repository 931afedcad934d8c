use super::{LinalgError, SymMatrix};

/// Elementwise interval `[center − halfwidth, center + halfwidth]` around a
/// symmetric matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    center: SymMatrix,
    halfwidth: SymMatrix,
}

impl IntervalMatrix {
    pub fn new(center: SymMatrix, halfwidth: SymMatrix) -> Result<Self, LinalgError> {
        if center.dim() != halfwidth.dim() {
            return Err(LinalgError::DimensionMismatch { expected: center.dim(), found: halfwidth.dim() });
        }
        if halfwidth.as_slice().iter().any(|h| !(*h >= 0.0)) {
            return Err(LinalgError::NegativeHalfwidth);
        }
        Ok(Self { center, halfwidth })
    }

    /// Interval centred at zero.
    pub fn deviation(halfwidth: SymMatrix) -> Result<Self, LinalgError> {
        Self::new(SymMatrix::zeros(halfwidth.dim()), halfwidth)
    }

    pub fn center(&self) -> &SymMatrix {
        &self.center
    }

    pub fn halfwidth(&self) -> &SymMatrix {
        &self.halfwidth
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn upper(&self) -> SymMatrix {
        &self.center + &self.halfwidth
    }

    pub fn lower(&self) -> SymMatrix {
        &self.center - &self.halfwidth
    }

    /// The same halfwidths around a zero centre.
    pub fn to_deviation(&self) -> IntervalMatrix {
        IntervalMatrix { center: SymMatrix::zeros(self.dim()), halfwidth: self.halfwidth.clone() }
    }

    pub fn contains(&self, m: &SymMatrix) -> bool {
        let n = self.dim();
        m.dim() == n
            && (0..n).all(|i| {
                (0..n).all(|j| (m[(i, j)] - self.center[(i, j)]).abs() <= self.halfwidth[(i, j)])
            })
    }
}

/// Sign-pattern worst case of an interval matrix: entry `(i, j)` takes the
/// upper end when `x_i·x_j ≥ 0` and the lower end otherwise, so
/// `xᵀAx ≤ xᵀCx` for every `A` in the interval.
pub fn maximize_op(interval: &IntervalMatrix, x: &[f64]) -> Result<SymMatrix, LinalgError> {
    let n = interval.dim();
    if x.len() != n {
        return Err(LinalgError::DimensionMismatch { expected: n, found: x.len() });
    }
    let c = interval.center();
    let h = interval.halfwidth();
    Ok(SymMatrix::from_upper(n, |i, j| {
        if x[i] * x[j] >= 0.0 {
            c[(i, j)] + h[(i, j)]
        } else {
            c[(i, j)] - h[(i, j)]
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sign_pattern_example() {
        let iv = IntervalMatrix::deviation(SymMatrix::from_upper(2, |_, _| 0.1)).unwrap();
        let c = maximize_op(&iv, &[1.0, -1.0]).unwrap();
        assert_eq!(c, SymMatrix::from_rows(&[[0.1, -0.1], [-0.1, 0.1]]).unwrap());
    }

    #[test]
    fn degenerate_interval_returns_center() {
        let center = SymMatrix::from_rows(&[[1.0, -2.0], [-2.0, 5.0]]).unwrap();
        let iv = IntervalMatrix::new(center.clone(), SymMatrix::zeros(2)).unwrap();
        assert_eq!(maximize_op(&iv, &[0.3, -4.0]).unwrap(), center);
    }

    #[test]
    fn zero_product_takes_max_branch() {
        let iv = IntervalMatrix::deviation(SymMatrix::from_upper(2, |_, _| 1.0)).unwrap();
        let c = maximize_op(&iv, &[0.0, -1.0]).unwrap();
        assert_eq!(c[(0, 1)], 1.0);
    }

    #[test]
    fn negative_halfwidth_rejected() {
        let h = SymMatrix::diagonal(&[0.1, -0.1]);
        assert_eq!(IntervalMatrix::deviation(h).unwrap_err(), LinalgError::NegativeHalfwidth);
    }

    #[test]
    fn monte_carlo_dominance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 3;
        let center = SymMatrix::from_upper(n, |_, _| rng.random_range(-1.0..1.0));
        let half = SymMatrix::from_upper(n, |_, _| rng.random_range(0.0..0.5));
        let iv = IntervalMatrix::new(center.clone(), half.clone()).unwrap();
        let x: [f64; 3] = [0.7, -1.2, 0.4];
        let bound = maximize_op(&iv, &x).unwrap().quad_form(&x);
        for _ in 0..10_000 {
            // elementwise realisations, not necessarily symmetric
            let a = Matrix::from_fn(n, n, |i, j| center[(i, j)] + half[(i, j)] * rng.random_range(-1.0..=1.0));
            let q: f64 = a.mul_vec(&x).iter().zip(&x).map(|(u, v)| u * v).sum();
            assert!(q <= bound + 1e-12);
        }
    }
}
