//! Command-line driver for the `pdirac-core` solver: configuration, command
//! dispatch and report output.

pub mod config;
pub mod output;
pub mod report;
pub mod run;

pub use config::{ConfigError, RunConfig};
pub use report::{Command, Results, RunReport, Status};
pub use run::run_command;

/// Exit code for configuration errors.
pub const EXIT_CONFIG: i32 = 2;

/// Environment variable capping the worker threads (0 = automatic).
pub const THREADS_ENV: &str = "PDIRAC_THREADS";

/// Sets up the global thread pool from [`THREADS_ENV`].
pub fn init_threads() -> Result<(), String> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())
}
