//! `pacing`: simulate, optimize and reproduce the experiment tables.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_mode, ExperimentConfig};

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, profile or parameters. Exit code 2.
    Input(String),
    /// Output could not be written. Exit code 1.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(name = "pacing", version, about = "Distance-maximizing pacing under a glycogen budget")]
struct Cli {
    /// `key = value` configuration file.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides PACING_OUTPUT_DIR and the config.
    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a given force profile.
    Simulate {
        /// One force per interval, or a CSV with an `f` column.
        #[arg(short, long)]
        profile: PathBuf,
        /// `transcription` or `refined`.
        #[arg(short, long, value_parser = mode_arg)]
        mode: Option<pacing_core::SimMode>,
    },
    /// Solve for the distance-maximizing force and run the adjoint diagnostics.
    Optimize,
    /// Nutrition strategies s0..s15.
    Sweep {
        /// Comma-separated strategy indices.
        #[arg(short, long, value_delimiter = ',')]
        strategies: Option<Vec<usize>>,
    },
    /// Good, average and bad VLa, with and without gels.
    Vla,
    /// The eight runner-level rows.
    Levels,
}

fn mode_arg(s: &str) -> Result<pacing_core::SimMode, String> {
    parse_mode(s).ok_or_else(|| format!("unknown mode `{s}` (transcription | refined)"))
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let env = std::env::var(output::OUTPUT_ENV).ok();
    let dir = output::resolve_dir(cli.output_dir.as_deref(), env.as_deref(), cfg.output_dir.as_deref());
    match cli.command {
        Command::Simulate { profile, mode } => commands::simulate_cmd(&cfg, &profile, mode, &dir),
        Command::Optimize => commands::optimize_cmd(&cfg, &dir),
        Command::Sweep { strategies } => commands::sweep_cmd(&cfg, strategies.as_deref(), &dir),
        Command::Vla => commands::vla_cmd(&cfg, &dir),
        Command::Levels => commands::levels_cmd(&cfg, &dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("pacing: {e}");
            ExitCode::from(match e {
                CliError::Input(_) => 2,
                CliError::Io(_) => 1,
            })
        }
    }
}
