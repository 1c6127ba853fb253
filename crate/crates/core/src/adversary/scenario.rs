use serde::{Deserialize, Serialize};

use crate::chain::ChainParams;
use crate::entangle::BellLabel;
use crate::qudit::{computational_basis, BlockId, Operator, C64};
use crate::rng::SimRng;
use crate::Result;

/// Basis an intercepting adversary measures in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureBasis {
    #[default]
    Computational,
    Fourier,
    /// Computational or Fourier with equal odds, per symbol.
    Random,
}

impl MeasureBasis {
    /// Concrete basis vectors; `Random` draws one of the other two.
    pub fn vectors(self, dim: usize, rng: &mut SimRng) -> Result<Vec<Vec<C64>>> {
        match self {
            MeasureBasis::Computational => Ok(computational_basis(dim, 1)),
            MeasureBasis::Fourier => Ok(Operator::fourier(dim)?.columns()),
            MeasureBasis::Random => {
                if rng.below(2) == 0 {
                    MeasureBasis::Computational.vectors(dim, rng)
                } else {
                    MeasureBasis::Fourier.vectors(dim, rng)
                }
            }
        }
    }
}

/// Quantum carrier an intercept targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    /// Superdense carrier of `from`'s public key on its way to `to`.
    Broadcast { from: BlockId, to: BlockId },
    /// Qudit R_r of chain pair r, travelling from B_r to B_(r+1).
    ChainLink(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyComponent {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollusionStrategy {
    /// Guess B_1's key uniformly at random.
    #[default]
    RandomKey,
    /// Sweep the key space in a fixed order, one guess per attempt.
    Exhaustive,
}

fn default_symbols() -> Vec<usize> {
    vec![0]
}

fn one() -> usize {
    1
}

fn b1() -> BlockId {
    BlockId(1)
}

/// Attack to run against a chain. Pure data: deserializable from configs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AttackScenario {
    Honest,
    InterceptResend {
        /// Defaults to B_2's broadcast to B_n.
        #[serde(default)]
        channel: Option<Channel>,
        #[serde(default = "default_symbols")]
        symbols: Vec<usize>,
        #[serde(default)]
        basis: MeasureBasis,
    },
    /// Shifts one data symbol of the triple sent by `at` (B_1 means the
    /// triple B_n receives).
    TamperData {
        #[serde(default = "b1")]
        at: BlockId,
        #[serde(default)]
        symbol: usize,
        #[serde(default = "one")]
        delta: usize,
    },
    /// Shifts one component of B_1's key inside the triple sent by `at`.
    TamperKey {
        #[serde(default = "b1")]
        at: BlockId,
        #[serde(default)]
        symbol: usize,
        #[serde(default = "x_component")]
        component: KeyComponent,
        #[serde(default = "one")]
        delta: usize,
    },
    /// Applies `U_(delta)` to one forwarded identity state sent by `at`.
    TamperIdentity {
        at: BlockId,
        #[serde(default)]
        symbol: usize,
        delta: BellLabel,
    },
    Collusion {
        colluders: Vec<BlockId>,
        #[serde(default)]
        strategy: CollusionStrategy,
        /// Forged data is the real data shifted by this much per symbol.
        #[serde(default = "one")]
        forged_offset: usize,
    },
    /// `block` performs its Bell measurement before its turn.
    TimingViolation {
        #[serde(default = "b1")]
        block: BlockId,
    },
}

fn x_component() -> KeyComponent {
    KeyComponent::X
}

impl AttackScenario {
    pub fn kind(&self) -> &'static str {
        match self {
            AttackScenario::Honest => "honest",
            AttackScenario::InterceptResend { .. } => "intercept_resend",
            AttackScenario::TamperData { .. } => "tamper_data",
            AttackScenario::TamperKey { .. } => "tamper_key",
            AttackScenario::TamperIdentity { .. } => "tamper_identity",
            AttackScenario::Collusion { .. } => "collusion",
            AttackScenario::TimingViolation { .. } => "timing_violation",
        }
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, AttackScenario::Honest)
    }

    /// Default single-symbol intercept on B_2's broadcast to B_n.
    pub fn intercept(basis: MeasureBasis) -> Self {
        AttackScenario::InterceptResend { channel: None, symbols: vec![0], basis }
    }

    pub fn channel(&self, params: &ChainParams) -> Option<Channel> {
        match self {
            AttackScenario::InterceptResend { channel, .. } => {
                Some(channel.unwrap_or(Channel::Broadcast { from: BlockId(2), to: params.last_block() }))
            }
            _ => None,
        }
    }

    /// Every way this scenario does not fit `params`.
    pub fn violations(&self, params: &ChainParams) -> Vec<String> {
        let n = params.n_blocks as u32;
        let m = params.m_symbols;
        let dim = params.dim;
        let mut v = Vec::new();
        let symbol_ok = |field: &str, s: usize, v: &mut Vec<String>| {
            if s >= m {
                v.push(format!("{}.{field}: symbol {s} out of range for m = {m}", self.kind()));
            }
        };
        match self {
            AttackScenario::Honest => {}
            AttackScenario::InterceptResend { symbols, .. } => {
                if symbols.is_empty() {
                    v.push("intercept_resend.symbols: empty".into());
                }
                let mut sorted = symbols.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != symbols.len() {
                    v.push("intercept_resend.symbols: duplicates".into());
                }
                for &s in symbols {
                    symbol_ok("symbols", s, &mut v);
                }
                match self.channel(params).expect("intercept has a channel") {
                    Channel::Broadcast { from, to } => {
                        if from.0 < 2 || from.0 >= n {
                            v.push(format!("intercept_resend.channel: {from} does not broadcast"));
                        }
                        if to.0 < 2 || to.0 > n || to == from {
                            v.push(format!("intercept_resend.channel: {to} is not a recipient of {from}"));
                        }
                    }
                    Channel::ChainLink(r) => {
                        if r == 0 || r >= n as usize {
                            v.push(format!("intercept_resend.channel: no chain link {r}"));
                        }
                    }
                }
            }
            AttackScenario::TamperData { at, symbol, delta } => {
                symbol_ok("symbol", *symbol, &mut v);
                if !(at.0 == 1 || (at.0 >= 3 && at.0 <= n)) {
                    v.push(format!("tamper_data.at: {at} sends no triple"));
                }
                if *delta >= dim {
                    v.push(format!("tamper_data.delta: {delta} outside Z_{dim}"));
                }
            }
            AttackScenario::TamperKey { at, symbol, delta, .. } => {
                symbol_ok("symbol", *symbol, &mut v);
                if !(at.0 == 1 || (at.0 >= 3 && at.0 <= n)) {
                    v.push(format!("tamper_key.at: {at} sends no triple"));
                }
                if *delta >= dim {
                    v.push(format!("tamper_key.delta: {delta} outside Z_{dim}"));
                }
            }
            AttackScenario::TamperIdentity { at, symbol, delta } => {
                symbol_ok("symbol", *symbol, &mut v);
                if at.0 < 3 || at.0 > n {
                    v.push(format!("tamper_identity.at: {at} forwards no identity to an intermediate block"));
                }
                if delta.x >= dim || delta.y >= dim {
                    v.push(format!("tamper_identity.delta: {delta} outside Z_{dim}^2"));
                }
            }
            AttackScenario::Collusion { colluders, forged_offset, .. } => {
                for c in colluders {
                    if c.0 == 1 {
                        v.push("collusion.colluders: B1 cannot collude against itself".into());
                    } else if c.0 > n || c.0 == 0 {
                        v.push(format!("collusion.colluders: {c} is not in the chain"));
                    }
                }
                if *forged_offset >= dim {
                    v.push(format!("collusion.forged_offset: {forged_offset} outside Z_{dim}"));
                }
            }
            AttackScenario::TimingViolation { block } => {
                if block.0 == 0 || block.0 + 1 >= n {
                    v.push(format!("timing_violation.block: {block} has no Bell measurement it could take early"));
                }
            }
        }
        v
    }
}
