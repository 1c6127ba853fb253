//! Public record of a chain run and its canonical transcript.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::types::{Identity, Verdict};
use crate::entangle::BellLabel;
use crate::qudit::BlockId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "id")]
pub enum Actor {
    Block(BlockId),
    Adversary,
    System,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Prepare,
    Hdbm,
    Broadcast,
    Publish,
    Transmit,
    Validate,
    Attack,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub time_index: u64,
    pub actor: Actor,
    pub action: Action,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    V1,
    V2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub time_index: u64,
    pub block: BlockId,
    pub check: Check,
    pub verdicts: Vec<Verdict>,
}

/// A public key as decoded by one recipient, and whether it matched what
/// the sender reports having sent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceivedKey {
    pub from: BlockId,
    pub to: BlockId,
    pub key: Vec<BellLabel>,
    pub matches_sent: bool,
}

/// Everything a run makes public, in event order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub events: Vec<LogEntry>,
    pub published: Option<Identity>,
    pub received_keys: Vec<ReceivedKey>,
    pub verdicts: Vec<VerdictRecord>,
}

impl LedgerRecord {
    pub fn next_index(&self) -> u64 {
        self.events.last().map_or(0, |e| e.time_index + 1)
    }

    pub fn log(&mut self, actor: Actor, action: Action, detail: impl Into<String>) -> u64 {
        let time_index = self.next_index();
        self.events.push(LogEntry { time_index, actor, action, detail: detail.into() });
        time_index
    }

    pub fn decode_mismatches(&self) -> usize {
        self.received_keys.iter().filter(|k| !k.matches_sent).count()
    }

    pub fn failed_checks(&self, check: Check) -> usize {
        self.verdicts.iter().filter(|v| v.check == check && !super::types::all_pass(&v.verdicts)).count()
    }

    /// Keys each recipient has decoded, by sender.
    pub fn keys_held_by(&self, to: BlockId) -> BTreeMap<BlockId, Vec<BellLabel>> {
        self.received_keys.iter().filter(|k| k.to == to).map(|k| (k.from, k.key.clone())).collect()
    }

    pub fn is_strictly_ordered(&self) -> bool {
        self.events.windows(2).all(|w| w[0].time_index < w[1].time_index)
    }

    /// Deterministic JSON serialization.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger records always serialize")
    }

    /// Hex SHA-256 of [`Self::canonical_json`].
    pub fn transcript_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_indices_increase() {
        let mut l = LedgerRecord::default();
        assert_eq!(l.log(Actor::System, Action::Prepare, "x"), 0);
        assert_eq!(l.log(Actor::Block(BlockId(2)), Action::Hdbm, "y"), 1);
        assert!(l.is_strictly_ordered());
        assert_eq!(l.transcript_hash(), l.clone().transcript_hash());
        assert_eq!(l.transcript_hash().len(), 64);
    }
}
