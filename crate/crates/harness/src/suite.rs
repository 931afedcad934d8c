//! The standard nine-episode evaluation.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::thread;

use crate::config::{Controller, Mode, NoiseCase, ScenarioConfig};
use crate::episode::{run_episode, EpisodeResult};
use crate::series::{fmt_num, write_csv};

pub const SUMMARY_HEADER: &str = "episode,scenario,noise_case,controller,seed,settling_time_min,max_postprandial_mgdl,min_g_mgdl,hypo_events,unstable_flag,saturated_near_target_fraction,certified_updates,K1,K2";

/// Fasting and meal runs for each noise case under the robust controller,
/// plus one noiseless fasting run under the optimal controller.
pub fn standard_episodes(seed: u64, mode: Mode) -> Vec<ScenarioConfig> {
    let robust = Controller::Robust { mode };
    let mut out = Vec::new();
    for base in [ScenarioConfig::fasting(), ScenarioConfig::meals()] {
        for case in 1..=4 {
            out.push(ScenarioConfig { noise_case: NoiseCase::Case(case), controller: robust, seed, ..base.clone() });
        }
    }
    out.push(ScenarioConfig { controller: Controller::Optimal, seed, ..ScenarioConfig::fasting() });
    out
}

pub fn episode_name(cfg: &ScenarioConfig) -> String {
    format!("{}_noise{}_{}", cfg.scenario_label(), cfg.noise_label(), cfg.controller.label())
}

/// Runs every episode on its own thread. Results keep the input order.
pub fn run_all(configs: &[ScenarioConfig]) -> Vec<EpisodeResult> {
    thread::scope(|scope| {
        let handles: Vec<_> = configs.iter().map(|c| scope.spawn(move || run_episode(c))).collect();
        handles.into_iter().map(|h| h.join().expect("episode thread panicked")).collect()
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_num).unwrap_or_default()
}

pub fn summary_line(r: &EpisodeResult) -> String {
    let c = &r.config;
    let m = &r.metrics;
    let [k1, k2] = r.final_gain();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        episode_name(c),
        c.scenario_label(),
        c.noise_label(),
        c.controller.label(),
        c.seed,
        opt(m.settling_time_min),
        opt(m.max_postprandial_mgdl),
        fmt_num(m.min_g_mgdl),
        m.hypo_events,
        m.unstable_flag,
        fmt_num(m.saturated_near_target_fraction),
        r.certified_updates(),
        fmt_num(k1),
        fmt_num(k2),
    )
}

pub fn write_summary<W: Write>(mut out: W, results: &[EpisodeResult]) -> io::Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for r in results {
        writeln!(out, "{}", summary_line(r))?;
    }
    out.flush()
}

/// Writes one series CSV per episode and `summary.csv` into `dir`.
pub fn write_outputs(dir: &Path, results: &[EpisodeResult]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for r in results {
        let f = File::create(dir.join(format!("{}.csv", episode_name(&r.config))))?;
        write_csv(BufWriter::new(f), &r.rows)?;
    }
    write_summary(BufWriter::new(File::create(dir.join("summary.csv"))?), results)
}

/// A robust episode that went unstable or dipped into hypoglycemia.
pub fn robust_failure(r: &EpisodeResult) -> bool {
    r.config.controller.is_robust() && (r.metrics.unstable_flag || r.metrics.hypo_events > 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_distinct_episodes() {
        let eps = standard_episodes(42, Mode::General);
        assert_eq!(eps.len(), 9);
        let mut names: Vec<String> = eps.iter().map(episode_name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 9);
        assert_eq!(eps.iter().filter(|c| c.controller == Controller::Optimal).count(), 1);
    }
}
