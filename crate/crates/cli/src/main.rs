use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rg2lab::{exit, run, Command};

#[derive(Parser)]
#[command(name = "rg2lab", version, about = "Curvature, symbol and flow analysis for the RG-2 flow")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Ricci, scalar, Rm² and sectional-curvature range at sampled points.
    Curvature(Common),
    /// Symbol matrix, ν spectrum and determinant at sampled points.
    Symbol(Common),
    /// Classify the DeTurck RG-2 system; the exit status encodes the verdict.
    Parabolicity(Common),
    /// Verdict and 1+αK range over a range of couplings, with bisected thresholds.
    Sweep(Common),
    /// Run the ansatz or grid flow and write the monitored trace.
    Flow(Common),
    /// Run the oracle cross-checks on the configured family.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides, `--key value` or `--key=value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Curvature(c) => (Command::Curvature, c),
        Sub::Symbol(c) => (Command::Symbol, c),
        Sub::Parabolicity(c) => (Command::Parabolicity, c),
        Sub::Sweep(c) => (Command::Sweep, c),
        Sub::Flow(c) => (Command::Flow, c),
        Sub::Verify(c) => (Command::Verify, c),
    };
    let mut stdout = std::io::stdout().lock();
    match run(command, common.config.as_deref(), &common.overrides, &mut stdout) {
        Ok(outcome) => {
            eprintln!("{command}: {}", outcome.summary);
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit::ERROR)
        }
    }
}
