mod commands;
mod config;
mod error;
mod io;
mod specs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::config::Params;
use crate::error::{CliError, CliResult};

/// Distortion energies, Hopf differentials and extremality checks for
/// planar mappings.
///
/// Commands: ode, map, energy, hopf, verify, minimize, export. Settings
/// come from `--config FILE` (flat `key = value` lines, `#` comments) and
/// from `key=value` arguments, which override the file.
#[derive(Parser, Debug)]
#[command(name = "quasiextremal", version)]
struct Cli {
    /// One of ode, map, energy, hopf, verify, minimize, export.
    command: String,
    /// `key=value` settings overriding the config file.
    overrides: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid: Option<usize>,
}

fn execute(cli: Cli) -> CliResult<commands::Outcome> {
    if !commands::COMMANDS.contains(&cli.command.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown command '{}' (expected one of {})",
            cli.command,
            commands::COMMANDS.join(", ")
        )));
    }
    let mut params = match &cli.config {
        Some(path) => Params::from_file(path)?,
        None => Params::default(),
    };
    params.apply_overrides(&cli.overrides)?;
    if let Some(s) = cli.seed {
        params.set("seed", s, "--seed");
    }
    if let Some(n) = cli.grid {
        params.set("grid", n, "--grid");
    }
    params.check_allowed(&cli.command, &commands::allowed_keys(&cli.command, &params))?;
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::io(&cli.out, e))?;
    commands::run(&cli.command, &params, &cli.out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {f}");
            }
            for line in &outcome.summary {
                println!("{line}");
            }
            match outcome.failure {
                None => ExitCode::SUCCESS,
                Some(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
