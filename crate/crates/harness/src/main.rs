use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use robust_irl::config::{Controller, Mode, ScenarioConfig};
use robust_irl::episode::run_episode;
use robust_irl::series::write_csv;
use robust_irl::suite;

#[derive(Parser)]
#[command(version, about = "Robust learning-based insulin control simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ControllerArg {
    Optimal,
    Robust,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    General,
    Frequent,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::General => Mode::General,
            ModeArg::Frequent => Mode::Frequent,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write its time series as CSV.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        controller: Option<ControllerArg>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Run the nine standard episodes and write per-episode CSVs plus summary.csv.
    Suite {
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, value_enum, default_value = "general")]
        mode: ModeArg,
    },
    /// Validate a configuration file.
    LintConfig {
        #[arg(long)]
        config: PathBuf,
    },
}

const EXIT_ROBUST_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn load(path: Option<&PathBuf>) -> Result<ScenarioConfig, ExitCode> {
    match path {
        None => Ok(ScenarioConfig::fasting()),
        Some(p) => ScenarioConfig::load(p).map_err(|e| {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CONFIG)
        }),
    }
}

fn io_fail(e: io::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_IO)
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    match cli.command {
        Command::Run { config, out, seed, controller, mode } => {
            let mut cfg = load(config.as_ref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let current_mode = match cfg.controller {
                Controller::Robust { mode } => mode,
                Controller::Optimal => Mode::General,
            };
            let mode = mode.map(Mode::from).unwrap_or(current_mode);
            match controller {
                Some(ControllerArg::Optimal) => cfg.controller = Controller::Optimal,
                Some(ControllerArg::Robust) => cfg.controller = Controller::Robust { mode },
                None if cfg.controller.is_robust() => cfg.controller = Controller::Robust { mode },
                None => {}
            }
            let result = run_episode(&cfg);
            match out {
                Some(p) => write_csv(BufWriter::new(File::create(&p).map_err(io_fail)?), &result.rows),
                None => write_csv(io::stdout().lock(), &result.rows),
            }
            .map_err(io_fail)?;
            let m = &result.metrics;
            eprintln!(
                "settling_time_min={:?} min_g_mgdl={:.1} hypo_events={} unstable={} certified_updates={}",
                m.settling_time_min,
                m.min_g_mgdl,
                m.hypo_events,
                m.unstable_flag,
                result.certified_updates()
            );
            Ok(if suite::robust_failure(&result) { ExitCode::from(EXIT_ROBUST_FAILURE) } else { ExitCode::SUCCESS })
        }
        Command::Suite { out, seed, mode } => {
            let results = suite::run_all(&suite::standard_episodes(seed, mode.into()));
            suite::write_outputs(&out, &results).map_err(io_fail)?;
            suite::write_summary(io::stdout().lock(), &results).map_err(io_fail)?;
            Ok(if results.iter().any(suite::robust_failure) { ExitCode::from(EXIT_ROBUST_FAILURE) } else { ExitCode::SUCCESS })
        }
        Command::LintConfig { config } => {
            load(Some(&config))?;
            println!("{}: ok", config.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(Cli::parse()).unwrap_or_else(|code| code)
}
