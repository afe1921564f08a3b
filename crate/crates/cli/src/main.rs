use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use micromacro_cli::commands::{self, Overrides};
use micromacro_cli::error::CliError;
use micromacro_cli::output::{gain_text, summary_text};
use micromacro_cli::selftest;

/// Micro-macro MCMC experiment runner.
#[derive(Parser)]
#[command(name = "micromacro", version)]
struct Cli {
    /// Worker threads for replica ensembles (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `base_seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output_dir` from the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run { config: PathBuf },
    /// Run a microscopic reference and a micro-macro experiment and report the gain.
    Compare { config_micro: PathBuf, config_mm: PathBuf },
    /// Tabulate free energy and effective-dynamics coefficients.
    Coeffs { config: PathBuf },
    /// Run the built-in invariant suite.
    Selftest,
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let overrides = Overrides {
        threads: cli.threads,
        seed: cli.seed,
        out: cli.out,
    };
    match cli.command {
        Command::Run { config } => {
            let config = commands::load(&config, &overrides)?;
            let (dir, result) = commands::run(config, &overrides)?;
            print!("{}", summary_text(&result));
            eprintln!("wrote {}", dir.display());
        }
        Command::Compare {
            config_micro,
            config_mm,
        } => {
            let micro = commands::load(&config_micro, &overrides)?;
            let mm = commands::load(&config_mm, &overrides)?;
            let (dir, report) = commands::compare(micro, mm, &overrides)?;
            print!("{}", gain_text(&report));
            eprintln!("wrote {}", dir.display());
        }
        Command::Coeffs { config } => {
            let config = commands::load(&config, &overrides)?;
            let path = commands::coeffs(config, &overrides)?;
            println!("wrote {}", path.display());
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {}: {}", c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("micromacro: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
