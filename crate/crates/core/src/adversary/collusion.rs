//! Dishonest blocks pooling their keys to pass off forged data as B_1's.

use serde::{Deserialize, Serialize};

use super::scenario::CollusionStrategy;
use super::stats::{Breakdown, DetectionStats};
use crate::chain::{all_pass, reconstruct_identity, ChainParams, ChainState, DitString, TransmissionTriple};
use crate::entangle::BellLabel;
use crate::qudit::BlockId;
use crate::rng::SimRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForgeryResult {
    pub attempted: bool,
    pub accepted: bool,
    pub validation_1_failed: bool,
    pub validation_2_failed: bool,
}

impl ForgeryResult {
    pub fn stats(&self) -> DetectionStats {
        let breakdown = Breakdown {
            validation_1: self.validation_1_failed as u64,
            validation_2: self.validation_2_failed as u64,
            ..Default::default()
        };
        DetectionStats::single(!self.accepted, breakdown)
    }
}

/// Uniformly random guess of B_1's key, one pair per symbol.
pub fn random_guess(params: &ChainParams, rng: &mut SimRng) -> Vec<BellLabel> {
    let d = params.dim;
    (0..params.m_symbols).map(|_| BellLabel::from_index(d, rng.below(d * d))).collect()
}

/// Guess number `i` in a fixed sweep of all `N^(2m)` keys.
pub fn nth_guess(params: &ChainParams, i: u64) -> Vec<BellLabel> {
    let per = (params.dim * params.dim) as u64;
    let mut rest = i;
    (0..params.m_symbols)
        .map(|_| {
            let l = BellLabel::from_index(params.dim, (rest % per) as usize);
            rest /= per;
            l
        })
        .collect()
}

fn check_colluders(params: &ChainParams, colluders: &[BlockId]) -> Result<()> {
    for c in colluders {
        if c.0 == 1 {
            return Err(Error::domain("B1 cannot be among the colluders"));
        }
        if c.0 == 0 || c.0 as usize > params.n_blocks {
            return Err(Error::domain(format!("{c} is not in the chain")));
        }
    }
    Ok(())
}

/// Colluders present `forged` data with `guess` for B_1's key to every
/// honest block in B_2..B_n. Each receives the identity its honest
/// predecessor would forward, built from the published identity and the
/// pooled intermediate keys.
pub fn forge_and_present(
    chain: &ChainState,
    colluders: &[BlockId],
    forged: &DitString,
    guess: &[BellLabel],
) -> Result<ForgeryResult> {
    let params = *chain.params();
    check_colluders(&params, colluders)?;
    if colluders.is_empty() {
        return Ok(ForgeryResult { attempted: false, accepted: false, validation_1_failed: false, validation_2_failed: false });
    }
    let published = chain
        .ledger()
        .published
        .clone()
        .ok_or_else(|| Error::ordering("nothing published to forge against"))?;
    let insider = colluders[0];
    let last = params.last_block();
    let mut result = ForgeryResult { attempted: true, accepted: true, validation_1_failed: false, validation_2_failed: false };
    for l in (2..=params.n_blocks as u32).map(BlockId).filter(|b| !colluders.contains(b)) {
        let (from, forwarded) = if l == last {
            (None, published.clone())
        } else {
            let from = BlockId(l.0 + 1);
            let sums = chain.intermediate_sum(insider, Some(from))?;
            (Some(from), reconstruct_identity(&published, &sums, from, 0)?)
        };
        let triple = TransmissionTriple { data: forged.clone(), sender_public_key: guess.to_vec(), forwarded_identity: forwarded };
        let (v1, v2, _) = chain.inspect_triple(&triple, from, l)?;
        result.validation_1_failed |= !all_pass(&v1);
        result.validation_2_failed |= !all_pass(&v2);
    }
    result.accepted = !(result.validation_1_failed || result.validation_2_failed);
    Ok(result)
}

/// Collusion attempts against one chain that has published its identity.
///
/// `RandomKey` makes a single random guess; `Exhaustive` tries every key
/// in turn, so the stats count accepting keys out of `N^(2m)`.
pub fn collude(
    chain: &ChainState,
    colluders: &[BlockId],
    forged: &DitString,
    strategy: CollusionStrategy,
    rng: &mut SimRng,
) -> Result<DetectionStats> {
    let params = *chain.params();
    check_colluders(&params, colluders)?;
    match strategy {
        CollusionStrategy::RandomKey => Ok(forge_and_present(chain, colluders, forged, &random_guess(&params, rng))?.stats()),
        CollusionStrategy::Exhaustive => {
            let space = ((params.dim * params.dim) as u64).checked_pow(params.m_symbols as u32).unwrap_or(u64::MAX);
            if space > 1 << 20 {
                return Err(Error::Unsupported(format!("key space of {space} guesses is too large to sweep")));
            }
            let mut stats = DetectionStats::default();
            for i in 0..space {
                stats = stats.merge(&forge_and_present(chain, colluders, forged, &nth_guess(&params, i))?.stats());
            }
            Ok(stats)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_covers_the_key_space() {
        let p = ChainParams::new(3, 2, 2).unwrap();
        let mut all: Vec<_> = (0..16).map(|i| nth_guess(&p, i)).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 16);
    }
}
