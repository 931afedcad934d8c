//! Simulation harness for robust learning-based glucose control: scenario
//! configuration, closed-loop episodes, metrics, CSV output and the
//! standard evaluation suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod episode;
pub mod metrics;
pub mod series;
pub mod suite;

pub use config::{ConfigError, ScenarioConfig};
pub use episode::{run_episode, EpisodeResult};
pub use metrics::Metrics;
