//! Command implementations behind the `firedes` binary. Each command is a
//! plain function so tests can drive it without spawning a process.

pub mod config;
pub mod run;
pub mod stats;

use std::fmt;
use std::path::Path;

use firedes_core::{parse_keel, Dataset, FilterKind};
use serde::Serialize;

pub use config::{ExperimentConfig, Selection};
pub use run::{cmd_run, RunReport};
pub use stats::{cmd_report, cmd_stats, GroupBy, StatsOptions};

/// Failure of a command, carrying the process exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad flags, config or input files. Exit code 2.
    Usage(String),
    /// Computation or I/O failure after validation. Exit code 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub(crate) fn runtime(msg: impl fmt::Display) -> CliError {
    CliError::Runtime(msg.to_string())
}

/// Reads and parses a KEEL file, naming the dataset after the file stem.
pub fn load_dataset(path: &Path) -> firedes_core::Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|e| firedes_core::Error::Parse {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(parse_keel(&text)?.renamed(name))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterOutput {
    pub dataset: String,
    pub kind: FilterKind,
    pub k: Option<usize>,
    pub before: usize,
    pub after: usize,
    pub removed: Vec<usize>,
    pub guard_applied: bool,
    pub class_counts_before: [usize; 2],
    pub class_counts_after: [usize; 2],
}

/// Runs one filter over a whole dataset file and returns the report as
/// pretty JSON. `k` only matters for ENN.
pub fn cmd_filter(path: &Path, kind: FilterKind, k: usize) -> CliResult<String> {
    if !path.is_file() {
        return Err(usage(format!("dataset file not found: {}", path.display())));
    }
    if k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let data = load_dataset(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let report = firedes_core::filtering::filter_select(kind, &data, k).map_err(runtime)?;
    let out = FilterOutput {
        dataset: data.name().to_string(),
        kind,
        k: (kind == FilterKind::Enn).then_some(k),
        before: report.before.iter().sum(),
        after: report.after.iter().sum(),
        removed: report.removed.clone(),
        guard_applied: report.guard_applied,
        class_counts_before: report.before,
        class_counts_after: report.after,
    };
    serde_json::to_string_pretty(&out).map_err(runtime)
}
