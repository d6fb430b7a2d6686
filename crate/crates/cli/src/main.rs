use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use cuspforge_cli::{parse_config, run, Command, ConfigError, ConfigErrors, Overrides, ResultLine, EXIT_ERROR};

/// Run one cuspforge verification and print a RESULT line.
#[derive(Debug, Parser)]
#[command(name = "cuspforge", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config (`key = value` with sections); defaults are used without one.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration tolerance, within [1e-12, 1e-4].
    #[arg(long)]
    tol: Option<f64>,
    /// Seed for randomized test points.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 picks automatically).
    #[arg(long)]
    threads: Option<usize>,
}

fn config_failure(command: Command, errors: &ConfigErrors) -> ExitCode {
    eprintln!("{errors}");
    println!("{}", ResultLine::fail(command, "config").metric("errors", errors.0.len()));
    ExitCode::from(EXIT_ERROR as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match &cli.config {
        Some(path) => match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("cannot read {}: {e}", path.display());
                println!("{}", ResultLine::fail(cli.command, "error"));
                return ExitCode::from(EXIT_ERROR as u8);
            }
        },
        None => String::new(),
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => return config_failure(cli.command, &errors),
    };
    let overrides = Overrides {
        tol: cli.tol,
        seed: cli.seed,
        threads: cli.threads,
        out: cli.out,
    };
    if let Err(errors) = config.apply(&overrides) {
        return config_failure(cli.command, &errors);
    }
    if let Some(named) = config.run.subcommand.filter(|&c| c != cli.command) {
        let e = ConfigError::Validation {
            path: "run.subcommand".into(),
            message: format!("config is for `{named}` but `{}` was requested", cli.command),
        };
        return config_failure(cli.command, &ConfigErrors(vec![e]));
    }

    let report = run(cli.command, &config);
    for path in &report.artifacts {
        println!("wrote {}", path.display());
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e:#}");
    }
    println!("{}", report.result);
    ExitCode::from(report.exit_code() as u8)
}
