//! `poisonbandit` command-line tool.
//!
//! Exit codes: 0 ok, 2 config or input error, 3 guarantee violation
//! (`run --strict`, `validate`).

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "poisonbandit",
    version,
    about = "Reward-poisoning attacks on bandit learners"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config location plus command-line overrides.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Experiment document (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Override the replication count.
    #[arg(long, value_name = "N")]
    pub replications: Option<u64>,
    /// Override the master seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Override the horizon: one value or a comma-separated list.
    #[arg(long, value_name = "T[,T...]", value_delimiter = ',')]
    pub horizon: Option<Vec<u64>>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and write its trace, summary and monitor report.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Exit with code 3 when a monitored guarantee is violated.
        #[arg(long)]
        strict: bool,
    },
    /// Replicate at every horizon of the config and fit cost scaling.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Run the monitor suite across replications and check the thresholds.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Also write per-replication summaries here.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Draw a sweep table as an SVG chart.
    Plot {
        /// Sweep CSV written by `sweep`.
        #[arg(long, value_name = "PATH")]
        stats: PathBuf,
        /// Output SVG file.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            strict,
        } => commands::run(&config, &out, strict),
        Command::Sweep { config, out } => commands::sweep(&config, &out),
        Command::Validate { config, out } => commands::validate(&config, out.as_deref()),
        Command::Plot { stats, out } => commands::plot(&stats, &out),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
