use std::path::PathBuf;
use std::process::ExitCode;

use calagg_cli::config::{catalog, RunConfig};
use calagg_cli::{run, CliError};
use clap::Parser;

/// Compute calibration scores and run calibration experiments from a config file.
#[derive(Parser, Debug)]
#[command(name = "calagg", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV; overrides the path in the config.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Where to write the JSON report; overrides the config. Without an
    /// output path the JSON goes to stdout and the text summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Print the registered scores, groupings and agglomerators, then exit.
    #[arg(long)]
    list_scores: bool,
}

fn execute(args: Args) -> Result<(), CliError> {
    let Some(config_path) = args.config else {
        return Err(CliError::Validation("--config is required".into()));
    };
    let mut config = RunConfig::load(&config_path)?;
    if let Some(data) = args.data {
        match &mut config.dataset {
            Some(d) => d.path = data,
            None => return Err(CliError::Validation("--data given but the config declares no column roles".into())),
        }
    }
    if args.seed.is_some() {
        config.seed = args.seed;
    }
    if args.out.is_some() {
        config.output = args.out;
    }
    let report = run(&config)?;
    let json = report.to_json();
    match &config.output {
        Some(path) => {
            std::fs::write(path, json)
                .map_err(|e| CliError::Execution(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", report.to_text());
        }
        None => {
            eprint!("{}", report.to_text());
            print!("{json}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.list_scores {
        print!("{}", catalog());
        return ExitCode::SUCCESS;
    }
    match execute(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("calagg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
