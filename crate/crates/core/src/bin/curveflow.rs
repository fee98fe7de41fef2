use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use curveflow::curve_geometry::NamedCurve;
use curveflow::harness::{gamma_report, run_experiment, ExperimentConfig, ExperimentName, HarnessError};

#[derive(Parser)]
#[command(name = "curveflow", version, about = "Intrinsic gradient flows of closed planar curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file (or a run manifest).
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write the Helmholtz and incompressibility spectra of a named curve.
    Operators {
        /// circle, perturbed_circle or trillium.
        #[arg(long)]
        curve: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Print limit and recovery-sequence energies and the surface-tension
    /// constants as JSON.
    Gamma {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a config and print it with every default filled in.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let outcome = run_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
            eprintln!("artifacts written to {}", outcome.dir.display());
        }
        Command::Operators { curve, out, n } => {
            let named = NamedCurve::from_name(&curve).ok_or_else(|| {
                HarnessError::Config(format!(
                    "unknown curve `{curve}`; valid names are: circle, perturbed_circle, trillium"
                ))
            })?;
            let mut cfg = ExperimentConfig::new(ExperimentName::Operators);
            cfg.n = Some(n);
            cfg.output_dir = Some(out);
            cfg.operators = Some(curveflow::harness::OperatorsExperiment { curve: named });
            let outcome = run_experiment(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&outcome.summary)?);
        }
        Command::Gamma { config } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let report = gamma_report(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Validate { config } => {
            let resolved = ExperimentConfig::from_path(&config)?.resolve()?;
            println!("{}", serde_json::to_string_pretty(&resolved)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
