//! Episode summary statistics, all in mg/dL and minutes.

use serde::Serialize;

pub const HYPO_MGDL: f64 = 70.0;
pub const SETTLING_BAND_MGDL: f64 = 10.0;
pub const SETTLING_HOLD_MIN: f64 = 30.0;
pub const POSTPRANDIAL_WINDOW_MIN: f64 = 180.0;
pub const NEAR_TARGET_MGDL: f64 = 20.0;
/// Fraction of saturated near-target steps that counts as persistent.
pub const PERSISTENT_SATURATION: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub settling_time_min: Option<f64>,
    pub max_postprandial_mgdl: Option<f64>,
    pub min_g_mgdl: f64,
    pub hypo_events: usize,
    pub unstable_flag: bool,
    pub saturated_near_target_fraction: f64,
}

impl Metrics {
    pub fn persistent_saturation(&self) -> bool {
        self.saturated_near_target_fraction >= PERSISTENT_SATURATION
    }
}

/// The series a summary is computed from.
pub struct Trace<'a> {
    pub t: &'a [f64],
    pub g_mgdl: &'a [f64],
    pub u_command: &'a [f64],
}

pub fn compute(trace: &Trace<'_>, g_target: f64, meal_starts: &[f64], unstable: bool) -> Metrics {
    Metrics {
        settling_time_min: settling_time(trace.t, trace.g_mgdl, g_target),
        max_postprandial_mgdl: max_postprandial(trace.t, trace.g_mgdl, meal_starts),
        min_g_mgdl: trace.g_mgdl.iter().copied().fold(f64::INFINITY, f64::min),
        hypo_events: hypo_events(trace.g_mgdl),
        unstable_flag: unstable,
        saturated_near_target_fraction: saturated_fraction(trace.g_mgdl, trace.u_command, g_target),
    }
}

/// Earliest sample time from which glucose stays in the band for the full
/// hold period. `None` when that never happens inside the record.
pub fn settling_time(t: &[f64], g: &[f64], target: f64) -> Option<f64> {
    let t_end = *t.last()?;
    let inside = |v: f64| (v - target).abs() <= SETTLING_BAND_MGDL;
    // first index of the run of in-band samples ending at or after i
    let mut run_end = vec![0usize; g.len() + 1];
    run_end[g.len()] = g.len();
    for i in (0..g.len()).rev() {
        run_end[i] = if inside(g[i]) { run_end[i + 1] } else { i };
    }
    for i in 0..g.len() {
        if t[i] + SETTLING_HOLD_MIN > t_end + 1e-9 {
            return None;
        }
        if !inside(g[i]) {
            continue;
        }
        let last_in = run_end[i];
        if last_in == g.len() || t[last_in] > t[i] + SETTLING_HOLD_MIN + 1e-9 {
            return Some(t[i]);
        }
    }
    None
}

pub fn max_postprandial(t: &[f64], g: &[f64], meal_starts: &[f64]) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &start in meal_starts {
        for (ti, gi) in t.iter().zip(g) {
            if *ti >= start && *ti <= start + POSTPRANDIAL_WINDOW_MIN {
                best = Some(best.map_or(*gi, |b| b.max(*gi)));
            }
        }
    }
    best
}

/// Number of maximal runs below the hypoglycemia threshold.
pub fn hypo_events(g: &[f64]) -> usize {
    let mut count = 0;
    let mut below = false;
    for &v in g {
        let now = v < HYPO_MGDL;
        if now && !below {
            count += 1;
        }
        below = now;
    }
    count
}

pub fn saturated_fraction(g: &[f64], u: &[f64], target: f64) -> f64 {
    if g.is_empty() {
        return 0.0;
    }
    let n = g.iter().zip(u).filter(|(g, u)| (**g - target).abs() <= NEAR_TARGET_MGDL && **u < 0.0).count();
    n as f64 / g.len() as f64
}
