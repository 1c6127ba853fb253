use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::AttackScenario;
use super::scheduler::{attack_schedule, run, Schedule};
use super::stats::{Breakdown, DetectionStats};
use crate::chain::{ChainParams, ChainState, Check, DitString};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Where B_1's data comes from in each trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    /// The literal string `"random"`: fresh uniform data per trial.
    Random(RandomTag),
    Fixed(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomTag {
    Random,
}

impl DataSpec {
    pub const RANDOM: DataSpec = DataSpec::Random(RandomTag::Random);

    pub fn draw(&self, params: &ChainParams, rng: &mut SimRng) -> Result<DitString> {
        match self {
            DataSpec::Random(_) => DitString::random(params.dim, params.m_symbols, rng),
            DataSpec::Fixed(s) => DitString::new(params.dim, s.clone()),
        }
    }
}

/// One trial's result.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub detected: bool,
    pub breakdown: Breakdown,
    pub observations: Vec<usize>,
    pub chain: ChainState,
}

/// Runs one chain under `scenario`. Ordering errors count as detections;
/// any other error is a misconfiguration and is returned.
pub fn run_trial(
    params: ChainParams,
    scenario: &AttackScenario,
    data: &DataSpec,
    rng: &mut SimRng,
    attempt: u64,
) -> Result<TrialOutcome> {
    run_scheduled(&attack_schedule(params, scenario)?, data, rng, attempt)
}

/// Like [`run_trial`] for an arbitrary, possibly malformed, schedule.
pub fn run_scheduled(schedule: &Schedule, data: &DataSpec, rng: &mut SimRng, attempt: u64) -> Result<TrialOutcome> {
    let params = schedule.params;
    let mut chain = ChainState::build(params)?;
    chain.set_block_data(data.draw(&params, rng)?)?;
    let (exec, ordering) = match run(schedule, &mut chain, rng, attempt) {
        Ok(e) => (e, false),
        Err(Error::Ordering(_)) => (Default::default(), true),
        Err(e) => return Err(e),
    };
    let ledger = chain.ledger();
    let mut breakdown = Breakdown {
        validation_1: (ledger.failed_checks(Check::V1) > 0) as u64,
        validation_2: (ledger.failed_checks(Check::V2) > 0) as u64,
        decode_mismatch: (ledger.decode_mismatches() > 0) as u64,
        ordering: ordering as u64,
    };
    let detected = match exec.forgery {
        Some(f) => {
            breakdown.validation_1 |= f.validation_1_failed as u64;
            breakdown.validation_2 |= f.validation_2_failed as u64;
            !f.accepted
        }
        None => breakdown != Breakdown::default(),
    };
    Ok(TrialOutcome { detected, breakdown, observations: exec.observations, chain })
}

/// Independent trials with per-trial streams `derive_seed(seed, t)`, run
/// in parallel. The aggregate does not depend on thread scheduling.
pub fn run_trials(
    scenario: &AttackScenario,
    params: ChainParams,
    data: &DataSpec,
    trials: u64,
    seed: u64,
) -> Result<DetectionStats> {
    if trials == 0 {
        return Err(Error::domain("at least one trial is required"));
    }
    let per_trial: Vec<DetectionStats> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SimRng::for_stream(seed, t);
            run_trial(params, scenario, data, &mut rng, t).map(|o| DetectionStats::single(o.detected, o.breakdown))
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.iter().fold(DetectionStats::default(), |acc, s| acc.merge(s)))
}

/// Adversary observations over `trials` seeded runs, in trial order.
pub fn collect_observations(
    scenario: &AttackScenario,
    params: ChainParams,
    data: &DataSpec,
    trials: u64,
    seed: u64,
) -> Result<Vec<usize>> {
    let per_trial: Vec<Vec<usize>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = SimRng::for_stream(seed, t);
            run_trial(params, scenario, data, &mut rng, t).map(|o| o.observations)
        })
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}
