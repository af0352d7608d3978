use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parstat::commands::{bench, gen, lowess, quantile};
use parstat::{CliError, CliResult};

/// Parallel summary statistics: Fourier-approximate quantiles and local regression.
#[derive(Debug, Parser)]
#[command(name = "parstat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a shuffled quantile-grid fixture as CSV shards.
    Gen(gen::GenArgs),
    /// Estimate sample quantiles.
    Quantile(quantile::QuantileArgs),
    /// Fit local polynomial regression at evaluation points.
    Lowess(lowess::LowessArgs),
    /// Compare Fourier and binning quantiles against the exact oracle.
    Bench(bench::BenchArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen(args) => {
            let manifest = gen::run(&args)?;
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            writeln!(std::io::stdout().lock(), "{text}").map_err(|e| CliError::io("stdout", e))?;
        }
        Command::Quantile(args) => quantile::run(&args)?.emit(args.out.as_deref())?,
        Command::Lowess(args) => {
            let outcome = lowess::run(&args)?;
            outcome.report.emit(args.out.as_deref())?;
            if outcome.all_failed() {
                return Err(CliError::Numerical("no evaluation point produced a fit".into()));
            }
        }
        Command::Bench(args) => bench::run(&args)?.report.emit(None)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
