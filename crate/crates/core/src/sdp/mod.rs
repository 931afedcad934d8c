//! Feasibility of affine linear matrix inequalities `F(z) = F₀ + Σ z_k·F_k ⪯ 0`
//! in scalar decision variables, and bisection on a decay rate.

mod barrier;
mod bisect;

pub use barrier::feasibility_solve;
pub use bisect::{maximize_alpha, AlphaSolution};

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{LinalgError, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Closed box for one variable; either side may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

impl Bounds {
    pub const FREE: Bounds = Bounds { lower: f64::NEG_INFINITY, upper: f64::INFINITY };

    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper }
    }

    pub fn intersect(self, other: Bounds) -> Bounds {
        Bounds { lower: self.lower.max(other.lower), upper: self.upper.min(other.upper) }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lower && v <= self.upper
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdpError {
    #[error("variable {0:?} has no value in the assignment")]
    MissingVariable(VarId),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("strict-feasibility margin must be positive, got {0}")]
    InvalidMargin(f64),
    #[error("empty box for variable {0:?}")]
    EmptyBox(VarId),
    #[error("infeasible: best achievable max eigenvalue is above {lower_bound:e}")]
    Infeasible { lower_bound: f64 },
    #[error("undecided after {iterations} Newton iterations (best margin {best_margin:e})")]
    Undecided { iterations: usize, best_margin: f64 },
    #[error("invalid bisection range [{lo}, {hi}] with tolerance {tol}")]
    InvalidRange { lo: f64, hi: f64, tol: f64 },
    #[error("LMI system infeasible at the lower end of the rate range: {0}")]
    InfeasibleAtLower(alloc::boxed::Box<SdpError>),
}

/// Values for decision variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Assignment(BTreeMap<VarId, f64>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, var: VarId, value: f64) {
        self.0.insert(var, value);
    }

    pub fn with(mut self, var: VarId, value: f64) -> Self {
        self.set(var, value);
        self
    }

    pub fn get(&self, var: VarId) -> Option<f64> {
        self.0.get(&var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(VarId, f64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (VarId, f64)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// `F(z) = F₀ + Σ z_k·F_k`, required to be negative semidefinite, with an
/// optional box on each variable.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLmi {
    constant: SymMatrix,
    terms: Vec<(VarId, SymMatrix)>,
    bounds: BTreeMap<VarId, Bounds>,
}

impl AffineLmi {
    pub fn new(constant: SymMatrix) -> Self {
        Self { constant, terms: Vec::new(), bounds: BTreeMap::new() }
    }

    /// Adds `z_var·coeff`; repeated variables accumulate.
    pub fn with_term(mut self, var: VarId, coeff: SymMatrix) -> Result<Self, SdpError> {
        if coeff.dim() != self.dim() {
            return Err(LinalgError::DimensionMismatch { expected: self.dim(), found: coeff.dim() }.into());
        }
        match self.terms.iter_mut().find(|(v, _)| *v == var) {
            Some((_, c)) => *c = &*c + &coeff,
            None => self.terms.push((var, coeff)),
        }
        Ok(self)
    }

    pub fn with_bounds(mut self, var: VarId, bounds: Bounds) -> Self {
        let merged = self.bounds.get(&var).map_or(bounds, |b| b.intersect(bounds));
        self.bounds.insert(var, merged);
        self
    }

    pub fn dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn constant(&self) -> &SymMatrix {
        &self.constant
    }

    pub fn terms(&self) -> &[(VarId, SymMatrix)] {
        &self.terms
    }

    pub fn bounds(&self) -> impl Iterator<Item = (VarId, Bounds)> + '_ {
        self.bounds.iter().map(|(k, v)| (*k, *v))
    }

    /// Every variable mentioned by a term or a bound.
    pub fn variables(&self) -> BTreeSet<VarId> {
        self.terms.iter().map(|(v, _)| *v).chain(self.bounds.keys().copied()).collect()
    }

    pub fn eval(&self, z: &Assignment) -> Result<SymMatrix, SdpError> {
        let mut acc = self.constant.clone();
        for (var, coeff) in &self.terms {
            let v = z.get(*var).ok_or(SdpError::MissingVariable(*var))?;
            if v != 0.0 {
                acc = &acc + &coeff.scale(v);
            }
        }
        Ok(acc)
    }

    /// Largest eigenvalue of `F(z)`.
    pub fn certificate(&self, z: &Assignment) -> Result<f64, SdpError> {
        Ok(self.eval(z)?.max_eigenvalue())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Required margin: solutions satisfy `λmax(F(z)) ≤ −eps/2`.
    pub eps: f64,
    /// Cap on Newton iterations across all barrier stages.
    pub iter_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { eps: 1e-6, iter_cap: 500 }
    }
}

/// A certified feasible point.
#[derive(Clone, Debug, PartialEq)]
pub struct LmiSolution {
    pub assignment: Assignment,
    /// `λmax` of each constraint at `assignment`, in input order.
    pub certificates: Vec<f64>,
}

impl LmiSolution {
    pub fn worst_certificate(&self) -> f64 {
        self.certificates.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}
