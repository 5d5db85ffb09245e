//! Command-line front end: parameter sweeps, eigenvalue tables, branch
//! tracing and verification, written as CSV or JSON tables plus a JSON
//! summary per run.
//!
//! Exit codes: 0 success, 1 invalid input or runtime error, 2 verification
//! failure, 3 incomplete branch.

pub mod commands;
pub mod config;
pub mod output;

use anyhow::{Context, Result};
use serde_json::json;

pub use commands::{Outcome, Status};
pub use config::{resolve, Args, Command, ConfigError, RunConfig};

/// Exit code for invalid input and runtime errors.
pub const EXIT_ERROR: i32 = 1;

/// Runs the configured command on a worker pool of `config.jobs` threads.
/// Results are merged in grid order, so they do not depend on the pool size.
pub fn execute(config: &RunConfig) -> Result<Outcome> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build()?;
    pool.install(|| match config.command {
        Command::Spectrum => commands::spectrum::run(config),
        Command::Eigen => commands::eigen::run(config),
        Command::Branch => commands::branch::run(config),
        Command::Verify => commands::verify::run(config),
        Command::Limits => commands::limits::run(config),
    })
}

/// Writes every table and `summary.json` into `config.out`; returns the file
/// names in write order.
pub fn write_outcome(config: &RunConfig, outcome: &Outcome) -> Result<Vec<String>> {
    std::fs::create_dir_all(&config.out).with_context(|| format!("creating {}", config.out.display()))?;
    let mut files = Vec::new();
    for (stem, table) in &outcome.tables {
        let name = format!("{stem}.{}", config.format.extension());
        output::write_file(&config.out, &name, &table.encode(config.format)?)?;
        files.push(name);
    }
    let summary = json!({
        "command": config.command.name(),
        "status": outcome.status,
        "exit_code": outcome.status.exit_code(),
        "config": config.echo(),
        "files": files,
        "results": outcome.results,
    });
    output::write_file(&config.out, "summary.json", &output::encode_json(&summary)?)?;
    files.push("summary.json".into());
    Ok(files)
}

/// Full run from parsed arguments; returns the process exit code.
pub fn run(args: &Args) -> i32 {
    let config = match resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_ERROR;
        }
    };
    let result = execute(&config).and_then(|outcome| Ok((write_outcome(&config, &outcome)?, outcome)));
    match result {
        Ok((files, outcome)) => {
            for f in &files {
                println!("wrote {}", config.out.join(f).display());
            }
            match outcome.status {
                Status::Pass => println!("{}: ok", config.command.name()),
                Status::VerificationFailure => eprintln!("{}: verification FAILED (see summary.json)", config.command.name()),
                Status::PartialBranch => eprintln!("{}: warning: incomplete branch (see summary.json)", config.command.name()),
            }
            outcome.status.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}
