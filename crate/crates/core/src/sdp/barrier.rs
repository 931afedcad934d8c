//! Phase-I barrier method.
//!
//! Minimises `t` subject to `F_c(z) ⪯ t·I` for every constraint, the variable
//! boxes, and a floor `t ≥ t_floor` that keeps the problem bounded. The
//! iteration stops as soon as an iterate has `λmax(F_c(z)) ≤ −eps/2` for all
//! `c`. Infeasibility is reported when the central-path duality bound proves
//! that no point reaches the margin.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{AffineLmi, Assignment, Bounds, LmiSolution, SdpError, SolverOptions, VarId};
use crate::linalg::{Matrix, SymMatrix};

const CENTERING_TOL: f64 = 1e-10;
const MU: f64 = 8.0;

struct Constraint<'a> {
    lmi: &'a AffineLmi,
    // (variable index, coefficient)
    terms: Vec<(usize, &'a SymMatrix)>,
}

struct Problem<'a> {
    vars: Vec<VarId>,
    boxes: Vec<Bounds>,
    constraints: Vec<Constraint<'a>>,
    t_floor: f64,
}

/// Searches for `z` with `λmax(F_c(z)) ≤ −eps/2` for every constraint and `z`
/// inside every box. `start` seeds the iteration; it need not be feasible.
///
/// Identical inputs give bit-identical results. Callers should re-verify the
/// returned assignment before acting on it.
pub fn feasibility_solve(
    constraints: &[AffineLmi],
    opts: &SolverOptions,
    start: Option<&Assignment>,
) -> Result<LmiSolution, SdpError> {
    if !(opts.eps > 0.0) {
        return Err(SdpError::InvalidMargin(opts.eps));
    }
    let target = -0.5 * opts.eps;

    let mut box_map: BTreeMap<VarId, Bounds> = BTreeMap::new();
    for lmi in constraints {
        for v in lmi.variables() {
            box_map.entry(v).or_insert(Bounds::FREE);
        }
        for (v, b) in lmi.bounds() {
            let e = box_map.entry(v).or_insert(Bounds::FREE);
            *e = e.intersect(b);
        }
    }
    for (v, b) in &box_map {
        if !(b.lower < b.upper) {
            return Err(SdpError::EmptyBox(*v));
        }
    }
    let vars: Vec<VarId> = box_map.keys().copied().collect();
    let boxes: Vec<Bounds> = box_map.values().copied().collect();
    let index = |v: VarId| vars.binary_search(&v).expect("variable registered");

    let cons: Vec<Constraint<'_>> = constraints
        .iter()
        .map(|lmi| Constraint { lmi, terms: lmi.terms().iter().map(|(v, c)| (index(*v), c)).collect() })
        .collect();

    let mut z: Vec<f64> = vars
        .iter()
        .zip(&boxes)
        .map(|(v, b)| interior_point(start.and_then(|s| s.get(*v)), *b))
        .collect();

    let mut problem = Problem { vars, boxes, constraints: cons, t_floor: f64::NEG_INFINITY };

    let lmax0 = problem.max_eigenvalues(&z);
    if let Some(sol) = problem.accept(&z, &lmax0, target) {
        return Ok(sol);
    }
    let worst0 = lmax0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let t0 = worst0 + 0.1 * worst0.abs().max(1.0);
    problem.t_floor = target - 10.0 * (t0 - target);

    let nu = problem.constraints.iter().map(|c| c.lmi.dim()).sum::<usize>()
        + problem.boxes.iter().map(|b| b.lower.is_finite() as usize + b.upper.is_finite() as usize).sum::<usize>()
        + 1;
    let nu = nu as f64;

    let dim = z.len() + 1;
    let mut y = core::mem::take(&mut z);
    y.push(t0);
    let mut s = nu / (t0 - problem.t_floor);
    let mut iterations = 0usize;
    let mut best_margin = worst0;

    loop {
        // centering
        loop {
            if iterations >= opts.iter_cap {
                log::debug!("LMI feasibility undecided after {iterations} iterations");
                return Err(SdpError::Undecided { iterations, best_margin });
            }
            let Some((grad, hess)) = problem.derivatives(&y, s) else {
                return Err(SdpError::Undecided { iterations, best_margin });
            };
            let step = newton_direction(&grad, &hess, dim);
            let decrement_sq = -dot(&grad, &step);
            if !(decrement_sq > 2.0 * CENTERING_TOL) {
                break;
            }
            let decrement = libm::sqrt(decrement_sq);
            let mut h = if decrement > 0.25 { 1.0 / (1.0 + decrement) } else { 1.0 };
            let f0 = problem.objective(&y, s).expect("current iterate is interior");
            let slope = dot(&grad, &step);
            let mut accepted = None;
            for _ in 0..60 {
                let cand: Vec<f64> = y.iter().zip(&step).map(|(a, d)| a + h * d).collect();
                if let Some(f) = problem.objective(&cand, s) {
                    if f <= f0 + 0.25 * h * slope {
                        accepted = Some(cand);
                        break;
                    }
                }
                h *= 0.5;
            }
            iterations += 1;
            let Some(next) = accepted else { break };
            y = next;

            let zc = &y[..dim - 1];
            let lmax = problem.max_eigenvalues(zc);
            let worst = lmax.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            best_margin = best_margin.min(worst);
            if let Some(sol) = problem.accept(zc, &lmax, target) {
                return Ok(sol);
            }
        }

        let lower_bound = y[dim - 1] - 2.0 * nu / s;
        if lower_bound > target {
            return Err(SdpError::Infeasible { lower_bound });
        }
        s *= MU;
    }
}

fn interior_point(hint: Option<f64>, b: Bounds) -> f64 {
    let guess = match hint.filter(|v| v.is_finite()) {
        Some(v) => v,
        None => match (b.lower.is_finite(), b.upper.is_finite()) {
            (true, true) => 0.5 * (b.lower + b.upper),
            (true, false) => b.lower + b.lower.abs().max(1.0),
            (false, true) => b.upper - b.upper.abs().max(1.0),
            (false, false) => 0.0,
        },
    };
    let margin = if b.lower.is_finite() && b.upper.is_finite() {
        1e-3 * (b.upper - b.lower)
    } else {
        1e-3 * b.lower.abs().max(b.upper.abs()).clamp(1e-3, 1.0)
    };
    let mut v = guess;
    if b.lower.is_finite() {
        v = v.max(b.lower + margin);
    }
    if b.upper.is_finite() {
        v = v.min(b.upper - margin);
    }
    v
}

impl Problem<'_> {
    fn assignment(&self, z: &[f64]) -> Assignment {
        self.vars.iter().copied().zip(z.iter().copied()).collect()
    }

    fn eval(&self, c: &Constraint<'_>, z: &[f64]) -> SymMatrix {
        let mut m = c.lmi.constant().as_matrix().clone();
        for (k, coeff) in &c.terms {
            if z[*k] != 0.0 {
                m = &m + &coeff.scale(z[*k]);
            }
        }
        SymMatrix::from_matrix(m).expect("square by construction")
    }

    fn max_eigenvalues(&self, z: &[f64]) -> Vec<f64> {
        self.constraints.iter().map(|c| self.eval(c, z).max_eigenvalue()).collect()
    }

    fn accept(&self, z: &[f64], lmax: &[f64], target: f64) -> Option<LmiSolution> {
        let inside = z.iter().zip(&self.boxes).all(|(v, b)| b.contains(*v));
        if inside && lmax.iter().all(|l| *l <= target) {
            Some(LmiSolution { assignment: self.assignment(z), certificates: lmax.to_vec() })
        } else {
            None
        }
    }

    /// Slack `t·I − F(z)` of every constraint.
    fn slacks(&self, y: &[f64]) -> Vec<SymMatrix> {
        let (z, t) = y.split_at(y.len() - 1);
        self.constraints.iter().map(|c| self.eval(c, z).scale(-1.0).shift(t[0])).collect()
    }

    /// Barrier objective, or `None` outside the domain.
    fn objective(&self, y: &[f64], s: f64) -> Option<f64> {
        let (z, t) = y.split_at(y.len() - 1);
        let t = t[0];
        if !(t > self.t_floor) {
            return None;
        }
        let mut f = s * t - libm::log(t - self.t_floor);
        for (v, b) in z.iter().zip(&self.boxes) {
            if b.lower.is_finite() {
                if !(*v > b.lower) {
                    return None;
                }
                f -= libm::log(v - b.lower);
            }
            if b.upper.is_finite() {
                if !(*v < b.upper) {
                    return None;
                }
                f -= libm::log(b.upper - v);
            }
        }
        for g in self.slacks(y) {
            let l = g.cholesky().ok()?;
            for i in 0..l.rows() {
                f -= 2.0 * libm::log(l[(i, i)]);
            }
        }
        f.is_finite().then_some(f)
    }

    fn derivatives(&self, y: &[f64], s: f64) -> Option<(Vec<f64>, Matrix)> {
        let dim = y.len();
        let t_idx = dim - 1;
        let mut grad = vec![0.0; dim];
        let mut hess = Matrix::zeros(dim, dim);

        grad[t_idx] += s;
        let dt = y[t_idx] - self.t_floor;
        grad[t_idx] -= 1.0 / dt;
        hess[(t_idx, t_idx)] += 1.0 / (dt * dt);

        for (k, b) in self.boxes.iter().enumerate() {
            if b.lower.is_finite() {
                let d = y[k] - b.lower;
                grad[k] -= 1.0 / d;
                hess[(k, k)] += 1.0 / (d * d);
            }
            if b.upper.is_finite() {
                let d = b.upper - y[k];
                grad[k] += 1.0 / d;
                hess[(k, k)] += 1.0 / (d * d);
            }
        }

        for (c, g) in self.constraints.iter().zip(self.slacks(y)) {
            let inv = g.as_matrix().inverse().ok()?;
            // S·D for each direction: D = −F_k for variables, D = I for t
            let mut dirs: Vec<(usize, Matrix)> = c.terms.iter().map(|(k, coeff)| (*k, -&(&inv * coeff.as_matrix()))).collect();
            dirs.push((t_idx, inv));
            for (a, wa) in &dirs {
                grad[*a] -= trace(wa);
            }
            for (i, (a, wa)) in dirs.iter().enumerate() {
                for (b, wb) in &dirs[i..] {
                    let v = trace_product(wa, wb);
                    hess[(*a, *b)] += v;
                    if a != b {
                        hess[(*b, *a)] += v;
                    }
                }
            }
        }
        Some((grad, hess))
    }
}

fn newton_direction(grad: &[f64], hess: &Matrix, dim: usize) -> Vec<f64> {
    let rhs = Matrix::column_vector(&grad.iter().map(|g| -g).collect::<Vec<_>>());
    let scale = (0..dim).map(|i| hess[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut reg = 0.0;
    for _ in 0..8 {
        let h = SymMatrix::from_matrix(hess.clone()).expect("square").shift(reg);
        if let Ok(l) = h.cholesky() {
            if let Ok(sol) = cholesky_solve(&l, &rhs) {
                return sol;
            }
        }
        reg = if reg == 0.0 { 1e-12 * scale } else { reg * 100.0 };
    }
    // steepest descent as a last resort
    rhs.as_slice().iter().map(|g| g / scale).collect()
}

fn cholesky_solve(l: &Matrix, rhs: &Matrix) -> Result<Vec<f64>, ()> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[(i, 0)];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn trace(m: &Matrix) -> f64 {
    (0..m.rows()).map(|i| m[(i, i)]).sum()
}

/// `tr(A·B)`
fn trace_product(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s
}
