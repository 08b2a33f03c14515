//! Experiment runner. Exit codes: 0 all criteria pass, 1 a criterion
//! failed, 2 usage or configuration error, 3 resource or runtime error.

use clap::Parser;
use percwalk::cli::{self, ExperimentName, SeedRange};
use percwalk::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "percwalk",
    about = "Random walks among random conductances: simulation and exact computation experiments",
    version
)]
struct Args {
    /// Experiment name (qip-marginal, mixing-trend, local-clt,
    /// geometry-audit, holes-tail, dirichlet-lln, exit-envelope,
    /// block-events, window-agreement)
    experiment: String,

    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,

    /// Override the config's seed range, e.g. 0..199
    #[arg(long)]
    seeds: Option<String>,

    /// Override the output directory
    #[arg(long)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::InvalidArgument(_)
        | Error::InvalidDomain(_)
        | Error::InvalidLaw(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let experiment: ExperimentName = match args.experiment.parse() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let seeds = match args.seeds.as_deref().map(str::parse::<SeedRange>).transpose() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let cfg = match cli::load_config(&args.config, experiment, seeds, args.out, args.workers) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    match cli::run(&cfg) {
        Ok(outcome) => {
            for c in &outcome.criteria {
                println!(
                    "{} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.detail
                );
            }
            println!(
                "{}: outputs in {} (config {})",
                if outcome.passed { "ok" } else { "criterion failure" },
                outcome.out_dir.display(),
                outcome.config_hash
            );
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
