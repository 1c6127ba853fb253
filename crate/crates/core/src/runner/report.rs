use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::adversary::{detection_oracle, run_trials, wilson, AttackScenario, DataSpec, DetectionStats};
use crate::chain::{run_honest, ChainParams, ChainState};
use crate::rng::{derive_seed, SimRng};
use crate::{Error, Result};

pub const VERSION: &str = concat!("hdqchain ", env!("CARGO_PKG_VERSION"));

/// Parameters and seed of the committed reference transcript.
pub const GOLDEN_PARAMS: (usize, usize, usize) = (4, 2, 1);
pub const GOLDEN_SEED: u64 = 0;
/// SHA-256 of the reference transcript's canonical JSON.
pub const GOLDEN_TRANSCRIPT_HASH: &str = "99a83f8fe8f3ea352f647c7ab590dc52d21c19a52401ce550775e114986e55ed";

pub const CSV_HEADER: &str = "scenario_kind,N,n,m,trials,detected,rate,wilson_lo,wilson_hi,oracle,delta";

/// Honest run whose transcript stands for a config: data and all
/// randomness come from one stream seeded with `seed`.
pub fn reference_run(params: ChainParams, data: &DataSpec, seed: u64) -> Result<ChainState> {
    let mut rng = SimRng::from_seed(seed);
    let data = data.draw(&params, &mut rng)?;
    Ok(run_honest(params, data, &mut rng)?.chain)
}

pub fn golden_transcript() -> Result<ChainState> {
    let (n, dim, m) = GOLDEN_PARAMS;
    reference_run(ChainParams::new(n, dim, m)?, &DataSpec::RANDOM, GOLDEN_SEED)
}

/// Outcome of one scenario at one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub scenario_index: usize,
    pub scenario_kind: String,
    pub scenario: AttackScenario,
    pub qudit_dim: usize,
    pub n_blocks: usize,
    pub m_symbols: usize,
    pub stats: DetectionStats,
    /// Wilson interval at the configured tolerance.
    pub tolerance_interval: (f64, f64),
    /// `None` where no closed form exists; such rows carry no predicate.
    pub oracle: Option<f64>,
    pub delta: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: ScenarioConfig,
    /// Hash of the honest reference run at the first swept dimension.
    pub transcript_hash: String,
    pub rows: Vec<ScenarioRow>,
    pub all_pass: bool,
    pub wall_clock_seconds: f64,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Copy with the wall-clock field zeroed, for reproducibility checks.
    pub fn without_wall_clock(&self) -> RunReport {
        RunReport { wall_clock_seconds: 0.0, ..self.clone() }
    }
}

/// Runs every scenario at every swept dimension. Rows are seeded
/// independently of each other and of thread scheduling.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    let v = config.violations();
    if !v.is_empty() {
        return Err(Error::Config(v));
    }
    let start = Instant::now();
    let params = config.params()?;
    let transcript_hash = reference_run(params[0], &config.data, config.seed)?.transcript_hash();
    let mut rows = Vec::new();
    for (i, scenario) in config.scenarios.iter().enumerate() {
        for (j, p) in params.iter().enumerate() {
            let row_seed = derive_seed(config.seed, (i * params.len() + j) as u64);
            let stats = run_trials(scenario, *p, &config.data, config.trials, row_seed)?;
            let oracle = match detection_oracle(scenario, p.n_blocks, p.dim, p.m_symbols) {
                Ok(o) => Some(o),
                Err(Error::Unsupported(_)) => None,
                Err(e) => return Err(e),
            };
            let pass = match oracle {
                _ if scenario.is_honest() => stats.detected == 0,
                Some(o) => stats.consistent_with(o, config.tolerance_z),
                None => true,
            };
            rows.push(ScenarioRow {
                scenario_index: i,
                scenario_kind: scenario.kind().into(),
                scenario: scenario.clone(),
                qudit_dim: p.dim,
                n_blocks: p.n_blocks,
                m_symbols: p.m_symbols,
                tolerance_interval: wilson(stats.detected, stats.trials, config.tolerance_z),
                delta: oracle.map(|o| (stats.detection_rate - o).abs()),
                oracle,
                stats,
                pass,
            });
        }
    }
    Ok(RunReport {
        version: VERSION.into(),
        config: config.clone(),
        transcript_hash,
        all_pass: rows.iter().all(|r| r.pass),
        rows,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV rendering of a report. Floats use Rust's shortest round-trip form.
pub fn csv_string(report: &RunReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        let s = &r.stats;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario_kind,
            r.qudit_dim,
            r.n_blocks,
            r.m_symbols,
            s.trials,
            s.detected,
            s.detection_rate,
            r.tolerance_interval.0,
            r.tolerance_interval.1,
            opt(r.oracle),
            opt(r.delta)
        )
        .expect("writing to a String");
    }
    out
}

pub fn emit_csv(report: &RunReport, path: &Path) -> Result<()> {
    std::fs::write(path, csv_string(report)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn emit_json(report: &RunReport, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
