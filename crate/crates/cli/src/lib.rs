//! Scenario runner for the collision-model solvers: reads a run configuration,
//! executes one scenario, and writes `series.csv`, `series.svg` and
//! `report.json` into the output directory.

pub mod config;
pub mod output;
pub mod scenario;

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

pub use config::{RunConfig, Scenario};
pub use scenario::Check;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

/// A file written by a run, with its SHA-256 digest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub wall_time_s: f64,
    pub threads: usize,
    pub files: Vec<FileEntry>,
}

impl RunReport {
    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

/// Worker count: `NMCM_THREADS` if set, otherwise the machine parallelism.
pub fn thread_budget() -> Result<usize, CliError> {
    match std::env::var("NMCM_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Validation(format!("NMCM_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<FileEntry, CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(FileEntry {
        path: name.to_string(),
        sha256: digest(bytes),
        bytes: bytes.len(),
    })
}

/// Runs a validated configuration and writes its outputs. All files are
/// rendered in memory first and written from this thread.
pub fn run(config: &RunConfig, threads: usize) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let outcome = scenario::run_scenario(config, threads)?;
    let csv = output::render_csv(&outcome.series)?;
    let svg = if outcome.plot {
        Some(output::render_svg(&outcome.series)?)
    } else {
        None
    };
    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut files = vec![write_file(dir, "series.csv", csv.as_bytes())?];
    if let Some(svg) = svg {
        files.push(write_file(dir, "series.svg", svg.as_bytes())?);
    }
    let mut report = RunReport {
        config: config.clone(),
        passed: outcome.checks.iter().all(|c| c.passed),
        checks: outcome.checks,
        wall_time_s: 0.0,
        threads,
        files,
    };
    report.wall_time_s = start.elapsed().as_secs_f64();
    let json = serde_json::to_string_pretty(&report).expect("report serialises");
    write_file(dir, "report.json", json.as_bytes())?;
    Ok(report)
}
