//! Command-line runner for scenario files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use homsync::scenario::{run_command, Command, Scenario};

#[derive(Debug, Parser)]
#[command(version, about = "Run a timing-jitter or HOM scenario and write CSV + summary")]
struct Cli {
    /// One of: xcorr, autocorr, hom, jitter-budget, vis-budget, drift, sweep.
    command: Command,
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn run(cli: &Cli) -> homsync::Result<()> {
    let mut scenario = Scenario::from_path(&cli.scenario)?;
    if let Some(seed) = cli.seed {
        scenario.seed = seed;
    }
    let output = run_command(&scenario, cli.command)?;
    output.write_to(&cli.out)?;
    print!("{}", output.summary_text());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let path = match &e {
                homsync::Error::Schema { path, .. } => path.as_str(),
                _ => "",
            };
            eprintln!("error kind={} path={:?} message={:?}", e.kind(), path, e.to_string());
            if e.kind() == "schema-invalid" {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
