//! Closed-loop learning episode on the glucose–insulin plant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use robust_irl_core::actor::{optimal_update, try_improve, ActorConfig, Policy, UpdateMode};
use robust_irl_core::critic::{accumulate_cost, estimate_value, TrajectoryPoint, TransitionSample};
use robust_irl_core::linalg::Matrix;
use robust_irl_core::plant::{applied_insulin, deviation_state, linearize, measure, step, PatientParams, PlantState, MGDL_PER_MMOL};
use robust_irl_core::sdp::SolverOptions;

use crate::config::{Controller, ScenarioConfig};
use crate::metrics::{self, Metrics, Trace};
use crate::series::Row;

const PROCESS_STREAM: u64 = 1;
const MEASUREMENT_STREAM: u64 = 2;
const PROBE_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub enum UpdateOutcome {
    Applied { k: Vec<f64>, alpha: Option<f64> },
    Fallback(String),
    CriticRejected(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateEvent {
    pub t: f64,
    pub samples: usize,
    pub outcome: UpdateOutcome,
}

#[derive(Clone, Debug)]
pub struct EpisodeResult {
    pub config: ScenarioConfig,
    pub rows: Vec<Row>,
    pub metrics: Metrics,
    pub updates: Vec<UpdateEvent>,
    /// First time the divergence guard tripped.
    pub diverged_at: Option<f64>,
}

impl EpisodeResult {
    pub fn final_gain(&self) -> [f64; 2] {
        let r = self.rows.last().expect("episode has rows");
        [r.k1, r.k2]
    }

    pub fn certified_updates(&self) -> usize {
        self.updates.iter().filter(|u| matches!(u.outcome, UpdateOutcome::Applied { alpha: Some(_), .. })).count()
    }
}

pub fn actor_config(cfg: &ScenarioConfig, params: &PatientParams) -> ActorConfig {
    let mode = match cfg.controller {
        Controller::Robust { mode } => mode.into(),
        Controller::Optimal => UpdateMode::General,
    };
    ActorConfig {
        q: cfg.q(),
        r: cfg.r(),
        zeta: cfg.actor.zeta,
        gamma1_grid: cfg.actor.gamma1_grid.clone(),
        alpha_max: cfg.actor.alpha_max,
        alpha_tol: cfg.actor.alpha_tol,
        mode,
        b: linearize(params, cfg.g_target_mmol(), 0.0).b,
        solver: SolverOptions::default(),
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

struct Learner<'a> {
    cfg: &'a ScenarioConfig,
    actor: ActorConfig,
    policy: Policy,
    last_certified: Matrix,
    samples: Vec<TransitionSample>,
    fresh: usize,
    window: Vec<TrajectoryPoint>,
    window_clean: bool,
    updates: Vec<UpdateEvent>,
}

impl Learner<'_> {
    fn command(&self, x: &[f64]) -> f64 {
        self.policy.control(x)[0]
    }

    fn close_window(&mut self, t: f64, x: &[f64], u_applied: f64) {
        if self.window_clean && !self.window.is_empty() {
            self.window.push(TrajectoryPoint { t, x: x.to_vec(), u: vec![u_applied] });
            let first = &self.window[0];
            match accumulate_cost(&self.window, &self.actor.q, &self.actor.r) {
                Ok(d) => {
                    self.samples.push(TransitionSample { t: first.t, x_start: first.x.clone(), x_end: x.to_vec(), d });
                    self.fresh += 1;
                }
                Err(e) => log::warn!("t = {t}: dropping window: {e}"),
            }
        }
        self.window.clear();
    }

    fn set_policy(&mut self, policy: Policy) {
        if policy.k != self.policy.k {
            self.samples.clear();
        }
        self.policy = policy;
    }

    fn update(&mut self, t: f64, x: &[f64]) {
        self.fresh = 0;
        let samples = self.samples.len();
        let est = match estimate_value(&self.samples, self.cfg.critic_theta) {
            Ok(e) => e,
            Err(e) => {
                log::debug!("t = {t}: critic rejected {samples} samples: {e}");
                self.updates.push(UpdateEvent { t, samples, outcome: UpdateOutcome::CriticRejected(e.to_string()) });
                return;
            }
        };
        let outcome = match self.cfg.controller {
            Controller::Optimal => match optimal_update(&est, &self.policy, &self.actor) {
                Ok(p) => {
                    let k = p.k.as_slice().to_vec();
                    self.set_policy(p);
                    UpdateOutcome::Applied { k, alpha: None }
                }
                Err(e) => UpdateOutcome::Fallback(e.to_string()),
            },
            Controller::Robust { .. } => match try_improve(&est, &self.policy, x, &self.actor) {
                Ok(c) => {
                    let k = c.k.as_slice().to_vec();
                    self.last_certified = c.k.clone();
                    let iteration = self.policy.iteration + 1;
                    self.set_policy(Policy { k: c.k, iteration, alpha_certified: Some(c.alpha) });
                    UpdateOutcome::Applied { k, alpha: Some(c.alpha) }
                }
                Err(e) => {
                    self.policy.alpha_certified = None;
                    UpdateOutcome::Fallback(e.to_string())
                }
            },
        };
        log::debug!("t = {t}: {outcome:?}");
        self.updates.push(UpdateEvent { t, samples, outcome });
    }
}

/// Runs one episode. The record holds `duration / dt + 1` rows.
///
/// Time is cut into windows of length `T`. While the probe is active, even
/// windows carry probing noise on the insulin command and odd windows run
/// the bare policy; only bare windows become critic samples. After every
/// `update_period` new samples the critic is fitted and the actor runs.
pub fn run_episode(cfg: &ScenarioConfig) -> EpisodeResult {
    let params = PatientParams::default();
    let noise = cfg.noise();
    let meals = cfg.meal_schedule();
    let g_target = cfg.g_target_mmol();
    let (steps, spw) = (cfg.steps(), cfg.steps_per_sample());

    let mut process_rng = stream(cfg.seed, PROCESS_STREAM);
    let mut measurement_rng = stream(cfg.seed, MEASUREMENT_STREAM);
    let mut probe_rng = stream(cfg.seed, PROBE_STREAM);

    let k0 = cfg.k0_matrix();
    let mut learner = Learner {
        cfg,
        actor: actor_config(cfg, &params),
        policy: Policy::new(k0.clone()),
        last_certified: k0,
        samples: Vec::new(),
        fresh: 0,
        window: Vec::new(),
        window_clean: false,
        updates: Vec::new(),
    };

    let mut s = PlantState::fasting(cfg.g_init / MGDL_PER_MMOL);
    let mut rows = Vec::with_capacity(steps + 1);
    let mut diverged_at = None;
    let mut probe_amp = 0.0;

    for k in 0..=steps {
        let t = k as f64 * cfg.dt;
        let g_hat = measure(s.g, &noise, &mut measurement_rng);
        let x = deviation_state(&s, g_hat, g_target);
        let guard = s.is_diverged();

        if guard {
            if diverged_at.is_none() {
                log::warn!("t = {t}: divergence guard tripped, reverting to the last certified gain");
                diverged_at = Some(t);
            }
            let k_safe = learner.last_certified.clone();
            learner.set_policy(Policy { k: k_safe, iteration: learner.policy.iteration, alpha_certified: None });
            learner.window_clean = false;
        }

        if k % spw == 0 {
            if k > 0 {
                let u_prev = applied_insulin(learner.command(&x), &params) - params.i_b;
                learner.close_window(t, &x, u_prev);
                if learner.fresh >= cfg.update_period && !guard {
                    learner.update(t, &x);
                }
            }
            let a = cfg.probe.amplitude_at(t);
            let probing = a > 0.0 && (k / spw) % 2 == 0;
            probe_amp = if probing { a } else { 0.0 };
            learner.window_clean = !probing && !guard;
        }

        let u = if guard {
            0.0
        } else {
            let probe = if probe_amp > 0.0 { probe_rng.random_range(-probe_amp..=probe_amp) } else { 0.0 };
            learner.command(&x) + probe
        };
        let i_applied = applied_insulin(u, &params);
        if learner.window_clean {
            learner.window.push(TrajectoryPoint { t, x: x.clone(), u: vec![i_applied - params.i_b] });
        }

        let kk = learner.policy.k.as_slice();
        rows.push(Row {
            t_min: t,
            g_mmol: s.g,
            g_mgdl: s.g * MGDL_PER_MMOL,
            ghat_mgdl: g_hat * MGDL_PER_MMOL,
            chi: s.chi,
            d1: s.d1,
            d2: s.d2,
            u_command: u,
            i_applied,
            k1: kk[0],
            k2: kk[1],
            alpha_certified: learner.policy.alpha_certified,
        });

        if k < steps {
            let (next, _) = step(&s, meals.rate_at(t), u, &params, &noise, &mut process_rng, cfg.dt);
            s = next;
        }
    }

    let metrics = summarize(&rows, cfg, diverged_at.is_some());
    EpisodeResult { config: cfg.clone(), rows, metrics, updates: learner.updates, diverged_at }
}

/// Metrics over the rows as they appear in the CSV.
pub fn summarize(rows: &[Row], cfg: &ScenarioConfig, unstable: bool) -> Metrics {
    let q: Vec<Row> = rows.iter().map(Row::quantized).collect();
    let t: Vec<f64> = q.iter().map(|r| r.t_min).collect();
    let g: Vec<f64> = q.iter().map(|r| r.g_mgdl).collect();
    let u: Vec<f64> = q.iter().map(|r| r.u_command).collect();
    let starts: Vec<f64> = cfg.meal_schedule().meals().iter().map(|m| m.start).collect();
    metrics::compute(&Trace { t: &t, g_mgdl: &g, u_command: &u }, cfg.g_target, &starts, unstable)
}
