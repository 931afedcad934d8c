//! Scenario configuration: a strict JSON document.

use std::fs;
use std::path::Path;

use robust_irl_core::actor::UpdateMode;
use robust_irl_core::linalg::{sym_basis_len, Matrix, SymMatrix};
use robust_irl_core::plant::{mgdl_to_mmol, Meal, MealSchedule, NoiseSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Controller state dimension.
pub const STATES: usize = 2;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MealEntry {
    pub start: f64,
    pub duration: f64,
    /// mmol/min
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fasting,
    Meals(Vec<MealEntry>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomNoise {
    pub sigma_w: f64,
    pub sigma_v: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NoiseCase {
    Case(u8),
    Custom(CustomNoise),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    General,
    Frequent,
}

impl From<Mode> for UpdateMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::General => UpdateMode::General,
            Mode::Frequent => UpdateMode::Frequent,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Controller {
    Optimal,
    Robust { mode: Mode },
}

impl Controller {
    pub fn label(&self) -> &'static str {
        match self {
            Controller::Optimal => "optimal",
            Controller::Robust { mode: Mode::General } => "robust-general",
            Controller::Robust { mode: Mode::Frequent } => "robust-frequent",
        }
    }

    pub fn is_robust(&self) -> bool {
        matches!(self, Controller::Robust { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    /// Half-range of the uniform probe on the insulin command (μIU/ml).
    pub amplitude: f64,
    /// The amplitude falls linearly to zero over this many minutes.
    pub decay_min: f64,
}

impl Probe {
    pub fn amplitude_at(&self, t: f64) -> f64 {
        if self.decay_min <= 0.0 {
            return 0.0;
        }
        self.amplitude * (1.0 - t / self.decay_min).max(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorSettings {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<f64>>,
    pub zeta: f64,
    pub gamma1_grid: Vec<f64>,
    pub alpha_max: f64,
    pub alpha_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// min
    pub duration: f64,
    /// min
    pub dt: f64,
    #[serde(rename = "sample_interval_T")]
    pub sample_interval_t: f64,
    /// Samples between policy updates.
    pub update_period: usize,
    pub scenario: Scenario,
    pub noise_case: NoiseCase,
    pub controller: Controller,
    /// mg/dL
    pub g_init: f64,
    /// mg/dL
    pub g_target: f64,
    #[serde(rename = "K0")]
    pub k0: Vec<f64>,
    pub probe: Probe,
    pub actor: ActorSettings,
    pub critic_theta: f64,
    pub seed: u64,
}

pub const FASTING_DURATION: f64 = 240.0;
pub const MEALS_DURATION: f64 = 1440.0;

fn default_meals() -> Vec<MealEntry> {
    MealSchedule::three_meals().meals().iter().map(|m| MealEntry { start: m.start, duration: m.duration, rate: m.rate }).collect()
}

impl ScenarioConfig {
    /// Fasting run from 290 mg/dL, noise case 1, general robust controller.
    pub fn fasting() -> Self {
        let k0 = vec![0.27, -266.0];
        let zeta = 10.0 * k0.iter().map(|k| k * k).sum::<f64>();
        Self {
            duration: FASTING_DURATION,
            dt: 0.1,
            sample_interval_t: 1.0,
            update_period: 10,
            scenario: Scenario::Fasting,
            noise_case: NoiseCase::Case(1),
            controller: Controller::Robust { mode: Mode::General },
            g_init: 290.0,
            g_target: 90.0,
            k0,
            probe: Probe { amplitude: 0.5, decay_min: 60.0 },
            actor: ActorSettings {
                q: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                r: vec![vec![1e-4]],
                zeta,
                gamma1_grid: vec![0.01, 0.1, 1.0, 10.0],
                alpha_max: 1.0,
                alpha_tol: 1e-3,
            },
            critic_theta: 0.05,
            seed: 42,
        }
    }

    /// One day with three meals.
    pub fn meals() -> Self {
        Self { duration: MEALS_DURATION, scenario: Scenario::Meals(default_meals()), ..Self::fasting() }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    pub fn steps_per_sample(&self) -> usize {
        (self.sample_interval_t / self.dt).round() as usize
    }

    pub fn g_target_mmol(&self) -> f64 {
        mgdl_to_mmol(self.g_target).expect("validated")
    }

    pub fn noise(&self) -> NoiseSpec {
        match self.noise_case {
            NoiseCase::Case(c) => NoiseSpec::case(c, self.seed).expect("validated"),
            NoiseCase::Custom(c) => NoiseSpec::new(c.sigma_w, c.sigma_v, self.seed).expect("validated"),
        }
    }

    pub fn noise_label(&self) -> String {
        match self.noise_case {
            NoiseCase::Case(c) => c.to_string(),
            NoiseCase::Custom(c) => format!("custom(w={},v={})", c.sigma_w, c.sigma_v),
        }
    }

    pub fn scenario_label(&self) -> &'static str {
        match self.scenario {
            Scenario::Fasting => "fasting",
            Scenario::Meals(_) => "meals",
        }
    }

    pub fn meal_schedule(&self) -> MealSchedule {
        match &self.scenario {
            Scenario::Fasting => MealSchedule::default(),
            Scenario::Meals(m) => MealSchedule::new(m.iter().map(|e| Meal { start: e.start, duration: e.duration, rate: e.rate }).collect())
                .expect("validated"),
        }
    }

    pub fn q(&self) -> SymMatrix {
        SymMatrix::from_rows(&self.actor.q).expect("validated")
    }

    pub fn r(&self) -> SymMatrix {
        SymMatrix::from_rows(&self.actor.r).expect("validated")
    }

    pub fn k0_matrix(&self) -> Matrix {
        Matrix::row_vector(&self.k0)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |name: &str, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { invalid(format!("{name} must be positive, got {v}")) };
        positive("duration", self.duration)?;
        positive("dt", self.dt)?;
        positive("sample_interval_T", self.sample_interval_t)?;
        if self.dt > self.sample_interval_t {
            return invalid("dt must not exceed sample_interval_T");
        }
        if self.duration < self.sample_interval_t {
            return invalid("duration is shorter than one sampling interval");
        }
        let whole = |x: f64| (x - x.round()).abs() < 1e-9 * x.abs().max(1.0);
        if !whole(self.sample_interval_t / self.dt) {
            return invalid("sample_interval_T must be a whole number of steps");
        }
        if !whole(self.duration / self.dt) {
            return invalid("duration must be a whole number of steps");
        }
        let min_period = sym_basis_len(STATES) + 1;
        if self.update_period < min_period {
            return invalid(format!("update_period must be at least {min_period}"));
        }
        positive("g_init", self.g_init)?;
        positive("g_target", self.g_target)?;
        if self.k0.len() != STATES || self.k0.iter().any(|k| !k.is_finite()) {
            return invalid(format!("K0 must hold {STATES} finite entries"));
        }
        if !(self.probe.amplitude >= 0.0 && self.probe.decay_min >= 0.0) {
            return invalid("probe amplitude and decay_min must be nonnegative");
        }
        if !(self.critic_theta > 0.0 && self.critic_theta < 1.0) {
            return invalid("critic_theta must lie in (0, 1)");
        }
        match self.noise_case {
            NoiseCase::Case(c) => NoiseSpec::case(c, 0).map(|_| ()),
            NoiseCase::Custom(c) => NoiseSpec::new(c.sigma_w, c.sigma_v, 0).map(|_| ()),
        }
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Scenario::Meals(m) = &self.scenario {
            MealSchedule::new(m.iter().map(|e| Meal { start: e.start, duration: e.duration, rate: e.rate }).collect())
                .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }

        let square = |name: &str, rows: &Vec<Vec<f64>>, n: usize| -> Result<SymMatrix, ConfigError> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return invalid(format!("{name} must be {n}x{n}"));
            }
            let symmetric = rows.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, v)| v.is_finite() && *v == rows[j][i]));
            if !symmetric {
                return invalid(format!("{name} must be finite and symmetric"));
            }
            Ok(SymMatrix::from_rows(rows).expect("checked shape"))
        };
        let q = square("Q", &self.actor.q, STATES)?;
        let r = square("R", &self.actor.r, 1)?;
        if q.min_eigenvalue() < -1e-12 * q.max_abs().max(1.0) {
            return invalid("Q must be positive semidefinite");
        }
        if !r.is_positive_definite() {
            return invalid("R must be positive definite");
        }
        positive("zeta", self.actor.zeta)?;
        positive("alpha_max", self.actor.alpha_max)?;
        positive("alpha_tol", self.actor.alpha_tol)?;
        if self.actor.gamma1_grid.is_empty() || self.actor.gamma1_grid.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
            return invalid("gamma1_grid must be nonempty and positive");
        }
        Ok(())
    }
}
