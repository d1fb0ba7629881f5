use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pdirac::config::RunConfig;
use pdirac::output::write_report;
use pdirac::{init_threads, run_command, Command, EXIT_CONFIG};

/// Spectral solver and checks for the projected Coulomb-Dirac operator.
#[derive(Parser, Debug)]
#[command(name = "pdirac", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a configuration value, e.g. `grid.n=400` or `Z=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Nuclear charge; shorthand for `--set params.z=...`.
    #[arg(long = "Z", visible_alias = "z", value_name = "Z")]
    z: Option<f64>,
    /// Output directory; shorthand for `--set output.directory=...`.
    #[arg(long, short, value_name = "DIR")]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut overrides = cli.set.clone();
    if let Some(z) = cli.z {
        overrides.push(format!("params.z={z}"));
    }
    if let Some(dir) = &cli.output {
        overrides.push(format!(
            "output.directory={}",
            serde_json::Value::String(dir.display().to_string())
        ));
    }
    let config = match RunConfig::load(cli.config.as_deref(), &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("configuration error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("configuration error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }

    let report = run_command(cli.command, &config);
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in &report.flags {
        eprintln!("flagged: {f}");
    }
    if let Some(e) = &report.error {
        eprintln!("error: {e}");
    }
    match &config.output.directory {
        Some(dir) => match write_report(&report, &config.output.formats, dir.as_ref()) {
            Ok(paths) => {
                for p in paths {
                    eprintln!("wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: cannot write report: {e}");
                return ExitCode::from(3);
            }
        },
        None => match report.to_json() {
            Ok(text) => print!("{text}"),
            Err(e) => {
                eprintln!("error: cannot serialize report: {e}");
                return ExitCode::from(3);
            }
        },
    }
    eprintln!(
        "{}: {:?} ({:.2} s)",
        report.command.name(),
        report.status,
        report.timings.total_seconds
    );
    ExitCode::from(report.status.exit_code() as u8)
}
