use serde::{Deserialize, Serialize};

use crate::entangle::BellLabel;
use crate::qudit::{BlockId, StateRegister};
use crate::{Error, Result};

/// Classical block data: `m >= 1` symbols over Z_N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DitString {
    dim: usize,
    symbols: Vec<usize>,
}

impl DitString {
    pub fn new(dim: usize, symbols: Vec<usize>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("qudit dimension {dim} < 2")));
        }
        if symbols.is_empty() {
            return Err(Error::domain("a dit string needs at least one symbol"));
        }
        if let Some((i, s)) = symbols.iter().enumerate().find(|(_, &s)| s >= dim) {
            return Err(Error::domain(format!("symbol {i} = {s} is outside Z_{dim}")));
        }
        Ok(DitString { dim, symbols })
    }

    pub fn random(dim: usize, len: usize, rng: &mut crate::rng::SimRng) -> Result<Self> {
        Self::new(dim, (0..len).map(|_| rng.below(dim.max(1))).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// Copy with symbol `i` shifted by `delta` mod N.
    pub fn shifted(&self, i: usize, delta: usize) -> Result<Self> {
        let mut symbols = self.symbols.clone();
        let s = symbols.get_mut(i).ok_or_else(|| Error::domain(format!("symbol {i} out of range")))?;
        *s = (*s + delta) % self.dim;
        Ok(DitString { dim: self.dim, symbols })
    }
}

/// A block's key material, one entry per symbol.
///
/// `private_key` holds the key pairs `(B^1, B^2)_i` derived from the
/// block's Bell measurements; the broadcast `public_key` carries the same
/// pairs and `public_sum[i] = B^1_i + B^2_i mod N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockKeyPair {
    pub block_id: BlockId,
    pub private_key: Vec<BellLabel>,
    pub public_key: Vec<BellLabel>,
    pub public_sum: Vec<usize>,
}

impl BlockKeyPair {
    pub fn from_pairs(block_id: BlockId, dim: usize, pairs: Vec<BellLabel>) -> Self {
        let public_sum = pairs.iter().map(|p| (p.x + p.y) % dim).collect();
        BlockKeyPair { block_id, public_key: pairs.clone(), private_key: pairs, public_sum }
    }
}

/// Key pair derived from a raw Bell-measurement outcome.
///
/// A Bell outcome `(a, b)` leaves the downstream qudit rotated by
/// `U_(-a, b)`, so the key records `(-a mod N, b)`; sums of keys are then
/// exactly the frame the terminal block has to undo.
pub fn key_from_outcome(dim: usize, outcome: BellLabel) -> BellLabel {
    BellLabel { x: (dim - outcome.x) % dim, y: outcome.y }
}

/// A published or reconstructed block identity: one single-qudit state per
/// symbol. Compared by fidelity only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identity {
    pub owner: BlockId,
    /// Logical event index of the measurement that produced it.
    pub timestamp: u64,
    pub basis: String,
    pub states: Vec<StateRegister>,
}

impl Identity {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Per-symbol fidelity with `other`.
    pub fn fidelities(&self, other: &Identity) -> Result<Vec<f64>> {
        if self.len() != other.len() {
            return Err(Error::domain(format!("identities of length {} and {}", self.len(), other.len())));
        }
        self.states.iter().zip(&other.states).map(|(a, b)| a.fidelity(b)).collect()
    }
}

/// The triple forwarded along the chain: data, the key attributed to B1
/// and an identity. Contents may be forged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionTriple {
    pub data: DitString,
    pub sender_public_key: Vec<BellLabel>,
    pub forwarded_identity: Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

pub fn all_pass(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.passed())
}
