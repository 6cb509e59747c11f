//! `cdlab`: experiment driver for the convection–diffusion lab.

mod config;
mod output;
mod runner;

use std::process::ExitCode;

use clap::Parser;

use config::{Experiment, ExperimentConfig, Overrides};

#[derive(Debug, Parser)]
#[command(name = "cdlab", version, about = "Exponentially fitted Petrov-Galerkin experiments")]
struct Cli {
    #[arg(value_enum)]
    experiment: Experiment,
    #[command(flatten)]
    flags: Overrides,
}

fn is_usage_error(err: &anyhow::Error) -> bool {
    matches!(
        err.downcast_ref::<cdlab_core::Error>(),
        Some(cdlab_core::Error::InvalidArgument(_) | cdlab_core::Error::UnknownProposition { .. })
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match ExperimentConfig::resolve(cli.experiment, &cli.flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cdlab: {e:#}");
            return ExitCode::from(2);
        }
    };
    match runner::run(&cfg) {
        Ok(checks) => {
            for c in &checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("outputs in {}", cfg.out_dir.display());
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("cdlab {}: {e:#}", cfg.experiment.name());
            ExitCode::from(if is_usage_error(&e) { 2 } else { 1 })
        }
    }
}
