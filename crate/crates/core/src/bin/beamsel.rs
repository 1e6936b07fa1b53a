use std::path::PathBuf;
use std::process::ExitCode;

use beamsel::cli::{execute_to_report, CliInvocation, Command};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "beamsel", version, about = "Genetic-algorithm beam selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate the base scenario (any sweep is ignored).
    Run(Common),
    /// Simulate every point of the configured sweep.
    Sweep(Common),
    /// Like `sweep`, plus iterations-to-convergence with and without delay cost.
    Convergence(Common),
    /// Compare the GA with exhaustive search on a small scenario.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        /// Number of trials (defaults to `realizations`).
        #[arg(long)]
        trials: Option<usize>,
        /// Required fraction of trials reaching the optimum.
        #[arg(long, default_value_t = 0.95)]
        min_attainment: f64,
    },
    /// Parse and validate a config without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config file (flat key=value).
    #[arg(long)]
    config: PathBuf,
    /// Override a config key, applied after parsing (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// RNG seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (all cores when unset).
    #[arg(long, env = "BEAMSEL_WORKERS")]
    workers: Option<usize>,
}

fn invocation(command: Command, c: Common) -> CliInvocation {
    let mut inv = CliInvocation::new(command, c.config);
    inv.overrides = c.overrides;
    inv.out_dir = c.out;
    inv.seed = c.seed;
    inv.workers = c.workers;
    inv
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let inv = match cli.command {
        Cmd::Run(c) => invocation(Command::Run, c),
        Cmd::Sweep(c) => invocation(Command::Sweep, c),
        Cmd::Convergence(c) => invocation(Command::Convergence, c),
        Cmd::Validate(c) => invocation(Command::Validate, c),
        Cmd::OracleCheck {
            common,
            trials,
            min_attainment,
        } => {
            let mut inv = invocation(Command::OracleCheck, common);
            inv.trials = trials;
            inv.min_attainment = min_attainment;
            inv
        }
    };
    let report = execute_to_report(&inv);
    if report.exit_code == 2 {
        eprint!("{}", report.text);
    } else {
        print!("{}", report.text);
    }
    ExitCode::from(report.exit_code as u8)
}
