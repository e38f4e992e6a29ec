//! `kakeya-lab`: experiment driver over `kakeya-core`.
//!
//! A run is a pure function of its [`ExperimentConfig`]; [`run`] returns a
//! [`Report`] and [`write_outputs`] puts it on disk together with any CSV
//! table and violation dump.

pub mod commands;
pub mod config;

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use config::{parse_rational, ExperimentConfig, Params, COMMANDS};

pub const SCHEMA: &str = "kakeya-lab/report-v1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug)]
pub enum LabError {
    /// Bad flags, config file or input file.
    Config(String),
    /// A size budget or the working precision was exceeded.
    Budget(String),
    /// An internal consistency check failed.
    Defect(String),
    Io(String),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Io(_) => EXIT_CONFIG,
            LabError::Budget(_) => EXIT_BUDGET,
            LabError::Defect(_) => EXIT_VIOLATION,
        }
    }
}

impl fmt::Display for LabError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabError::Config(m) => write!(f, "config error: {m}"),
            LabError::Budget(m) => write!(f, "budget error: {m}"),
            LabError::Defect(m) => write!(f, "consistency failure: {m}"),
            LabError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for LabError {}

impl From<kakeya_core::Error> for LabError {
    fn from(e: kakeya_core::Error) -> Self {
        use kakeya_core::Error as E;
        match e {
            E::Budget(_) | E::Precision(_) => LabError::Budget(e.to_string()),
            E::Consistency(_) | E::NotEisenstein { .. } => LabError::Defect(e.to_string()),
            _ => LabError::Config(e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Violation,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub status: Status,
    pub exit_code: i32,
    pub violations: Vec<String>,
    pub error: Option<String>,
    pub results: Value,
    pub wall_time_ms: u64,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Report {
    /// The report with the timing fields zeroed; equal configs give equal
    /// normalized reports.
    pub fn normalized(&self) -> Report {
        Report { wall_time_ms: 0, timestamp: 0, ..self.clone() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// What a command produced, before it is wrapped in a [`Report`].
#[derive(Debug, Default)]
pub struct Output {
    pub results: Value,
    pub violations: Vec<String>,
    pub csv: Option<String>,
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Runs the configured command on a pool of `jobs` workers.
pub fn run(cfg: &ExperimentConfig) -> Outcome {
    let start = Instant::now();
    let jobs = cfg.params.jobs.unwrap_or(1);
    let result = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start {jobs} workers: {e}")))
        .and_then(|pool| pool.install(|| commands::dispatch(cfg)));
    let (status, exit_code, output, error) = match result {
        Ok(out) if out.violations.is_empty() => (Status::Ok, EXIT_OK, out, None),
        Ok(out) => (Status::Violation, EXIT_VIOLATION, out, None),
        Err(e) => (Status::Error, e.exit_code(), Output::default(), Some(e.to_string())),
    };
    let report = Report {
        schema: SCHEMA.into(),
        command: cfg.command.clone(),
        version: VERSION.into(),
        config: cfg.clone(),
        seed: cfg.params.seed.unwrap_or(0),
        status,
        exit_code,
        violations: output.violations,
        error,
        results: output.results,
        wall_time_ms: start.elapsed().as_millis() as u64,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    Outcome { report, csv: output.csv }
}

/// Where the violation dump for `cfg` goes.
pub fn violation_path(cfg: &ExperimentConfig) -> PathBuf {
    match &cfg.params.out {
        Some(out) => out.with_extension("violation.json"),
        None => PathBuf::from(format!("kakeya-lab-{}.violation.json", cfg.command)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), LabError> {
    std::fs::write(path, text).map_err(|e| LabError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes the report (to `--out` or stdout), the CSV table (to `--csv`, or
/// next to `--out`), and on a violation the artifact dump.
pub fn write_outputs(outcome: &Outcome) -> Result<(), LabError> {
    let cfg = &outcome.report.config;
    match &cfg.params.out {
        Some(path) => write_file(path, &outcome.report.to_json())?,
        None => println!("{}", outcome.report.to_json()),
    }
    if let Some(csv) = &outcome.csv {
        let path = cfg.params.csv.clone().or_else(|| cfg.params.out.as_ref().map(|o| o.with_extension("csv")));
        if let Some(path) = path {
            write_file(&path, csv)?;
        }
    }
    if outcome.report.status == Status::Violation || outcome.report.exit_code == EXIT_VIOLATION {
        let dump = serde_json::json!({
            "schema": SCHEMA,
            "command": cfg.command,
            "config": cfg,
            "violations": outcome.report.violations,
            "error": outcome.report.error,
            "artifacts": outcome.report.results,
        });
        write_file(&violation_path(cfg), &serde_json::to_string_pretty(&dump).expect("json"))?;
    }
    Ok(())
}
