//! Glucose-kinetics virtual patient.
//!
//! Four states: two carbohydrate absorption compartments `D1`, `D2` (mmol),
//! plasma glucose `g` (mmol/l) and insulin action `χ` (1/min). The insulin
//! command is a deviation above the basal level and is clamped at zero.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{LinearModel, Matrix};

pub const MGDL_PER_MMOL: f64 = 18.016;
/// Glucose floor applied after every step (mmol/l).
pub const G_FLOOR: f64 = 1e-6;
/// `|g|` above this (mmol/l) counts as divergence.
pub const G_DIVERGENCE: f64 = 100.0;
/// `|χ|` above this (1/min) counts as divergence.
pub const CHI_DIVERGENCE: f64 = 10.0;

const MAX_STEP_RATE: f64 = 0.1;
const MAX_SUBSTEPS: f64 = 10_000.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("negative value {0} where a nonnegative one is required")]
    Negative(f64),
    #[error("patient parameter {0} must be strictly positive")]
    InvalidParameter(&'static str),
    #[error("noise standard deviations must be nonnegative")]
    InvalidNoise,
    #[error("unknown noise case {0}; expected 1 to 4")]
    UnknownNoiseCase(u8),
    #[error("meal {index} is invalid or overlaps the previous one")]
    InvalidMeal { index: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PatientParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    /// Carbohydrate bio-availability.
    pub a_g: f64,
    /// Absorption time constant (min).
    pub tau_d: f64,
    pub v_plasma: f64,
    /// Basal insulin (μIU/ml).
    pub i_b: f64,
}

impl Default for PatientParams {
    fn default() -> Self {
        Self { p1: 0.2, p2: 0.028, p3: 1e-4, a_g: 0.8, tau_d: 10.0, v_plasma: 2730.0, i_b: 7.326 }
    }
}

impl PatientParams {
    pub fn validate(&self) -> Result<(), PlantError> {
        let fields = [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p3", self.p3),
            ("a_g", self.a_g),
            ("tau_d", self.tau_d),
            ("v_plasma", self.v_plasma),
            ("i_b", self.i_b),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlantError::InvalidParameter(name));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantState {
    pub d1: f64,
    pub d2: f64,
    pub g: f64,
    pub chi: f64,
}

impl PlantState {
    /// Fasting start: empty gut, no insulin action.
    pub fn fasting(g: f64) -> Self {
        Self { d1: 0.0, d2: 0.0, g, chi: 0.0 }
    }

    fn axpy(&self, h: f64, d: &PlantState) -> PlantState {
        PlantState { d1: self.d1 + h * d.d1, d2: self.d2 + h * d.d2, g: self.g + h * d.g, chi: self.chi + h * d.chi }
    }

    pub fn is_finite(&self) -> bool {
        self.d1.is_finite() && self.d2.is_finite() && self.g.is_finite() && self.chi.is_finite()
    }

    /// Divergence guard on glucose and insulin action.
    pub fn is_diverged(&self) -> bool {
        !self.is_finite() || self.g.abs() > G_DIVERGENCE || self.chi.abs() > CHI_DIVERGENCE
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    /// Process noise on `dg/dt`.
    pub sigma_w: f64,
    /// Glucose measurement noise (mmol/l).
    pub sigma_v: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma_w: f64, sigma_v: f64, seed: u64) -> Result<Self, PlantError> {
        if !(sigma_w >= 0.0 && sigma_v >= 0.0) {
            return Err(PlantError::InvalidNoise);
        }
        Ok(Self { sigma_w, sigma_v, seed })
    }

    /// The four reference noise levels, numbered 1 to 4.
    pub fn case(case: u8, seed: u64) -> Result<Self, PlantError> {
        let (w, v) = match case {
            1 => (0.0, 0.0),
            2 => (0.0, 0.002),
            3 => (0.1, 0.1),
            4 => (0.1, 1.0),
            other => return Err(PlantError::UnknownNoiseCase(other)),
        };
        Self::new(w, v, seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Meal {
    /// Start time (min).
    pub start: f64,
    /// Duration (min).
    pub duration: f64,
    /// Carbohydrate intake rate (mmol/min).
    pub rate: f64,
}

/// Square carbohydrate pulses, sorted by start time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MealSchedule {
    meals: Vec<Meal>,
}

impl MealSchedule {
    pub fn new(mut meals: Vec<Meal>) -> Result<Self, PlantError> {
        meals.sort_by(|a, b| a.start.total_cmp(&b.start));
        for (i, m) in meals.iter().enumerate() {
            let valid = m.start.is_finite() && m.duration > 0.0 && m.duration.is_finite() && m.rate >= 0.0 && m.rate.is_finite();
            let overlaps = i > 0 && meals[i - 1].start + meals[i - 1].duration > m.start;
            if !valid || overlaps {
                return Err(PlantError::InvalidMeal { index: i });
            }
        }
        Ok(Self { meals })
    }

    /// Breakfast, lunch and dinner at 07:00, 12:00 and 18:00: 15-min pulses
    /// of 4 mmol/min.
    pub fn three_meals() -> Self {
        Self::new(
            [420.0, 720.0, 1080.0].iter().map(|&start| Meal { start, duration: 15.0, rate: 4.0 }).collect(),
        )
        .expect("valid schedule")
    }

    pub fn meals(&self) -> &[Meal] {
        &self.meals
    }

    /// Intake rate at time `t` (mmol/min); pulses are closed on the left.
    pub fn rate_at(&self, t: f64) -> f64 {
        self.meals.iter().find(|m| t >= m.start && t < m.start + m.duration).map_or(0.0, |m| m.rate)
    }
}

/// Right-hand side of the model for intake `d` (mmol/min) and insulin `i` (μIU/ml).
pub fn derivatives(s: &PlantState, d: f64, i: f64, p: &PatientParams) -> PlantState {
    PlantState {
        d1: p.a_g * d - s.d1 / p.tau_d,
        d2: (s.d1 - s.d2) / p.tau_d,
        g: -p.p1 * s.g - s.chi * s.g + s.d2 / p.tau_d,
        chi: -p.p2 * s.chi + p.p3 * p.v_plasma * (i - p.i_b),
    }
}

/// Insulin reaching the patient for a command `u` above basal.
pub fn applied_insulin(u_command: f64, p: &PatientParams) -> f64 {
    p.i_b + u_command.max(0.0)
}

/// Advances one step of length `dt` with intake `d` held constant. Returns
/// the new state and the applied insulin.
pub fn step<R: Rng + ?Sized>(
    s: &PlantState,
    d: f64,
    u_command: f64,
    p: &PatientParams,
    noise: &NoiseSpec,
    rng: &mut R,
    dt: f64,
) -> (PlantState, f64) {
    debug_assert!(dt > 0.0);
    let i = applied_insulin(u_command, p);
    let f = |x: &PlantState| derivatives(x, d, i, p);
    // split the step when insulin action makes glucose decay stiff
    let rate = p.p1 + s.chi.abs() + 1.0 / p.tau_d + p.p2;
    let substeps = if rate * dt > MAX_STEP_RATE { libm::ceil(rate * dt / MAX_STEP_RATE).min(MAX_SUBSTEPS) as usize } else { 1 };
    let h = dt / substeps as f64;
    let mut next = *s;
    for _ in 0..substeps {
        let k1 = f(&next);
        let k2 = f(&next.axpy(0.5 * h, &k1));
        let k3 = f(&next.axpy(0.5 * h, &k2));
        let k4 = f(&next.axpy(h, &k3));
        next = PlantState {
            d1: next.d1 + h / 6.0 * (k1.d1 + 2.0 * k2.d1 + 2.0 * k3.d1 + k4.d1),
            d2: next.d2 + h / 6.0 * (k1.d2 + 2.0 * k2.d2 + 2.0 * k3.d2 + k4.d2),
            g: next.g + h / 6.0 * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g),
            chi: next.chi + h / 6.0 * (k1.chi + 2.0 * k2.chi + 2.0 * k3.chi + k4.chi),
        };
    }
    let w: f64 = rng.sample(StandardNormal);
    next.g += noise.sigma_w * libm::sqrt(dt) * w;
    next.g = next.g.max(G_FLOOR);
    next.d1 = next.d1.max(0.0);
    next.d2 = next.d2.max(0.0);
    (next, i)
}

/// Noisy glucose reading (mmol/l).
pub fn measure<R: Rng + ?Sized>(g: f64, noise: &NoiseSpec, rng: &mut R) -> f64 {
    let v: f64 = rng.sample(StandardNormal);
    g + noise.sigma_v * v
}

/// Controller state `[ĝ − g_target, χ]`.
pub fn deviation_state(s: &PlantState, g_hat: f64, g_target: f64) -> Vec<f64> {
    vec![g_hat - g_target, s.chi]
}

/// Jacobian of the glucose and insulin-action equations at `(g_op, χ_op)`.
pub fn linearize(p: &PatientParams, g_op: f64, chi_op: f64) -> LinearModel {
    let a = Matrix::from_rows(&[[-p.p1 - chi_op, -g_op], [0.0, -p.p2]]).expect("2x2");
    let b = Matrix::from_rows(&[[0.0], [p.p3 * p.v_plasma]]).expect("2x1");
    LinearModel::new(a, b).expect("consistent shapes")
}

pub fn mmol_to_mgdl(v: f64) -> Result<f64, PlantError> {
    if v < 0.0 {
        return Err(PlantError::Negative(v));
    }
    Ok(v * MGDL_PER_MMOL)
}

pub fn mgdl_to_mmol(v: f64) -> Result<f64, PlantError> {
    if v < 0.0 {
        return Err(PlantError::Negative(v));
    }
    Ok(v / MGDL_PER_MMOL)
}
