use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use selfsim_cli::{run_file, Command};

/// Self-similar solutions of the Riemann problem for piecewise-constant
/// nonlinear diffusion.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Free boundaries, sampled profile and optimizer trace.
    Solve(Io),
    /// u(t, x) on a grid of times and positions.
    Evaluate(Io),
    /// Finite-difference cross-check.
    Validate(Io),
    /// Convergence study for a tabulated diffusion function.
    Continuum(Io),
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    config: PathBuf,
    /// Prefix prepended to every output file name, e.g. `out/heat_`.
    #[arg(long, default_value = "")]
    out: String,
}

fn threads() -> Result<usize, String> {
    match std::env::var("SELFSIM_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(format!("SELFSIM_THREADS must be a positive integer, got `{v}`")),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, io) = match cli.command {
        Sub::Solve(io) => (Command::Solve, io),
        Sub::Evaluate(io) => (Command::Evaluate, io),
        Sub::Validate(io) => (Command::Validate, io),
        Sub::Continuum(io) => (Command::Continuum, io),
    };
    let result = threads().and_then(|t| run_file(command, &io.config, &io.out, t).map_err(|e| e.to_string()));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
