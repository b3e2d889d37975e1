//! Command-line experiment runner for pay-to-bid auctions.
//!
//! Exit codes: 0 on success, 2 for invalid configuration or parameters, 3
//! for numerical failures, including any output row marked FAILED.

mod commands;
mod config;
mod table;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use config::{Cli, ExperimentConfig, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] paytobid::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::Model(_) => 2,
            CliError::Output(_) => 1,
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let config = ExperimentConfig::resolve(cli.command, &cli.flags)?;
    let report = commands::run(cli.command, &config)?;
    let mut out = std::io::stdout().lock();
    match config.format {
        Format::Csv => report
            .table
            .write_csv(&mut out)
            .map_err(|e| CliError::Output(e.to_string()))?,
        Format::Json => {
            let text = serde_json::to_string_pretty(&report.table.to_json())
                .map_err(|e| CliError::Output(e.to_string()))?;
            writeln!(out, "{text}").map_err(|e| CliError::Output(e.to_string()))?;
        }
    }
    out.flush().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(report.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: some rows are marked FAILED; see the reason column");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
