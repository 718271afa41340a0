//! Experiment harness for the distributed conductance tester: graph
//! sources, experiment specs, JSONL reports, the oracle battery and
//! parameter sweeps. The `condtest` binary is a thin clap front end.

use std::path::PathBuf;

pub mod experiment;
pub mod oracle;
pub mod report;
pub mod spec;
pub mod sweep;

pub use experiment::run_experiment;
pub use oracle::{oracle_battery, CheckResult, CheckStatus};
pub use report::{read_jsonl, summarize, write_jsonl, ReportRecord, Summary, SCHEMA_VERSION};
pub use spec::{ExperimentSpec, GraphSource};
pub use sweep::{run_sweep, Axis, SweepCell};

/// Environment variable naming the default report directory.
pub const OUT_DIR_ENV: &str = "CONDTEST_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] condtest_core::Error),
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed report: {0}")]
    Report(String),
}
