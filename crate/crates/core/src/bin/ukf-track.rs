use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ukf_tracker::cli::{exit_code, run, Overrides, RunConfig, Workflow};

/// Block-matching detection and unscented Kalman filter tracking.
#[derive(Debug, Parser)]
#[command(name = "ukf-track", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect moving regions in every consecutive frame pair.
    Detect {
        /// Also write every block's motion vector.
        #[arg(long)]
        dump_field: bool,
        /// Drop regions without consistent motion over the temporal window.
        #[arg(long)]
        temporal_filter: bool,
    },
    /// Track the objects found in the first frame pair through the sequence.
    Track {
        /// CSV of initial object states (x,y[,vx,vy]) at frame 0.
        #[arg(long, value_name = "FILE")]
        init: Option<PathBuf>,
    },
    /// Write one trial's trajectories on the turning path.
    Simulate,
    /// Monte-Carlo UKF vs KF comparison on the turning path.
    Compare,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML config file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Directory of PGM frames.
    #[arg(long, global = true, value_name = "DIR")]
    input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    block_size: Option<usize>,
    /// Unscented transform spread, in [1e-4, 1].
    #[arg(long, global = true, value_name = "X")]
    alpha: Option<f64>,
    /// Comma-separated noise standard deviations.
    #[arg(long, global = true, value_name = "LIST", value_delimiter = ',')]
    sigma_levels: Option<Vec<f64>>,
    #[arg(long, global = true, value_name = "N")]
    trials: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };

    let mut overrides = Overrides {
        input: cli.common.input,
        out: cli.common.out,
        seed: cli.common.seed,
        block_size: cli.common.block_size,
        alpha: cli.common.alpha,
        sigma_levels: cli.common.sigma_levels,
        trials: cli.common.trials,
        ..Overrides::default()
    };
    let workflow = match cli.command {
        Command::Detect {
            dump_field,
            temporal_filter,
        } => {
            overrides.dump_field = dump_field;
            overrides.temporal_filter = temporal_filter;
            Workflow::Detect
        }
        Command::Track { init } => {
            overrides.init = init;
            Workflow::Track
        }
        Command::Simulate => Workflow::Simulate,
        Command::Compare => Workflow::Compare,
    };

    let result = cli
        .common
        .config
        .as_deref()
        .map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
        .and_then(|mut cfg| {
            overrides.apply(&mut cfg);
            run(workflow, &cfg)
        });
    match result {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ukf-track: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
