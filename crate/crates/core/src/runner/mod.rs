//! Config ingestion, scenario execution and report emission.
//!
//! Configs and reports are JSON; the CSV export is flat. The master seed
//! may be overridden with the `HDQCHAIN_SEED` environment variable.

mod config;
mod report;
pub mod selftest;

use std::path::{Path, PathBuf};

pub use config::{parse_config, Dims, OutputPaths, ScenarioConfig, DEFAULT_TOLERANCE_Z, DEFAULT_TRIALS};
pub use report::{
    csv_string, emit_csv, emit_json, golden_transcript, reference_run, run_scenario, RunReport, ScenarioRow,
    CSV_HEADER, GOLDEN_PARAMS, GOLDEN_SEED, GOLDEN_TRANSCRIPT_HASH, VERSION,
};
pub use selftest::{selftest, CriterionResult, SelftestReport};

use crate::{Error, Result};

pub const SEED_ENV: &str = "HDQCHAIN_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ACCEPTANCE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Resource { .. } => EXIT_RESOURCE,
        _ => EXIT_CONFIG,
    }
}

/// Master seed from `HDQCHAIN_SEED`, if set.
pub fn seed_from_env() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(vec![format!("{SEED_ENV}: {s:?} is not an unsigned integer")])),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(Error::Config(vec![format!("{SEED_ENV}: {e}")])),
    }
}

/// Files a run writes to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// `--out dir` wins over paths from the config.
pub fn resolve_outputs(config: &ScenarioConfig, out_dir: Option<&Path>) -> Outputs {
    match out_dir {
        Some(dir) => Outputs { report: Some(dir.join("report.json")), csv: Some(dir.join("report.csv")) },
        None => Outputs { report: config.output.report.clone(), csv: config.output.csv.clone() },
    }
}

/// Runs a config and writes whatever outputs it names.
pub fn execute(config: &ScenarioConfig, outputs: &Outputs) -> Result<RunReport> {
    let report = run_scenario(config)?;
    for path in [&outputs.report, &outputs.csv].into_iter().flatten() {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        }
    }
    if let Some(p) = &outputs.report {
        emit_json(&report, p)?;
    }
    if let Some(p) = &outputs.csv {
        emit_csv(&report, p)?;
    }
    Ok(report)
}
