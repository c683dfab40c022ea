use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use decoherence_cli::{render, run, CliError, Command, Overrides, RunConfig};

/// Decoherence of spin registers: figure data as CSV.
///
/// Thread count follows RAYON_NUM_THREADS; output does not depend on it.
#[derive(Debug, Parser)]
#[command(name = "decoherence", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// TOML file of key = value parameters.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output path; standard output if absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Parameter override, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let overrides = Overrides { seed: cli.seed, samples: cli.samples, params: cli.params.clone() };
    let cfg = RunConfig::resolve(cli.command, cli.config.as_deref(), &overrides)?;
    let csv = render(&run(&cfg)?, &cfg)?;
    match &cli.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("decoherence: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
