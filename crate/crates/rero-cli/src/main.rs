mod args;
mod commands;
mod config;
mod output;

use std::io::IsTerminal;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::ConfigMap;
use output::Format;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            diagnostic(&message);
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let cfg = match &cli.config {
        Some(path) => ConfigMap::load(path)?,
        None => ConfigMap::empty(),
    };
    let format = match cli.format {
        Some(f) => f,
        None => match cfg.raw("format") {
            Some("json") => Format::Json,
            Some("csv") | None => Format::Csv,
            Some(other) => return Err(format!("config key 'format': expected csv or json, got '{other}'")),
        },
    };

    let rows = match cli.command {
        Command::Bound(args) => commands::run_bound(args, &cfg)?,
        Command::Calibrate(args) => commands::run_calibrate(args, &cfg)?,
        Command::Corridor(args) => commands::run_corridor(args, &cfg)?,
        Command::Simulate(args) => commands::run_simulate(args, &cfg)?,
        Command::Sweep(args) => commands::run_sweep(args, &cfg)?,
    };

    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    output::write_rows(&mut lock, format, &rows).map_err(|e| format!("cannot write output: {e}"))
}

// Diagnostics go to stderr; color only on a terminal with NO_COLOR unset.
fn diagnostic(message: &str) {
    let stderr = std::io::stderr();
    let use_color = stderr.is_terminal() && std::env::var_os("NO_COLOR").is_none();
    if use_color {
        eprintln!("\x1b[31merror:\x1b[0m {message}");
    } else {
        eprintln!("error: {message}");
    }
}
