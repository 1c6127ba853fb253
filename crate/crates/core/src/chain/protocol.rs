use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::identity::{
    apply_keys, global_identity_states, identity_state, reconstruct_identity, validate_1,
    validate_2, IDENTITY_BASIS,
};
use super::ledger::{Action, Actor, Check, LedgerRecord, ReceivedKey, VerdictRecord};
use super::types::{all_pass, key_from_outcome, BlockKeyPair, DitString, Identity, TransmissionTriple, Verdict};
use crate::entangle::{bell_state, discard_bell_pair, hdbm, superdense_decode, superdense_encode, timebin_encode_owned, BellLabel};
use crate::qudit::{measure_computational, measure_projective, BlockId, Operator, QuditTag, StateRegister, C64, DEFAULT_AMPLITUDE_CAP};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Size of a chain run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_blocks: usize,
    pub dim: usize,
    pub m_symbols: usize,
    pub amplitude_cap: usize,
}

/// Widest register the protocol builds: two Bell pairs during a swap.
pub const SWAP_WIDTH: usize = 4;

impl ChainParams {
    pub fn new(n_blocks: usize, dim: usize, m_symbols: usize) -> Result<Self> {
        Self::with_cap(n_blocks, dim, m_symbols, DEFAULT_AMPLITUDE_CAP)
    }

    pub fn with_cap(n_blocks: usize, dim: usize, m_symbols: usize, amplitude_cap: usize) -> Result<Self> {
        if n_blocks < 3 {
            return Err(Error::domain(format!("{n_blocks} blocks leave no intermediate block (need at least 3)")));
        }
        if dim < 2 {
            return Err(Error::domain(format!("qudit dimension {dim} < 2")));
        }
        if m_symbols == 0 {
            return Err(Error::domain("at least one symbol is required"));
        }
        let width = SWAP_WIDTH.max(m_symbols) as u32;
        let needed = (dim as u128).checked_pow(width).unwrap_or(u128::MAX);
        if needed > amplitude_cap as u128 {
            return Err(Error::Resource { needed, cap: amplitude_cap });
        }
        Ok(ChainParams { n_blocks, dim, m_symbols, amplitude_cap })
    }

    pub fn last_block(&self) -> BlockId {
        BlockId(self.n_blocks as u32)
    }

    /// B_2 .. B_{n-1}.
    pub fn intermediates(&self) -> impl Iterator<Item = BlockId> {
        (2..self.n_blocks as u32).map(BlockId)
    }

    /// Everyone a block's public key goes to: B_2 .. B_n except the sender.
    pub fn default_recipients(&self, from: BlockId) -> Vec<BlockId> {
        (2..=self.n_blocks as u32).map(BlockId).filter(|&b| b != from).collect()
    }
}

/// Quantum resources of one symbol's chain.
#[derive(Debug, Clone)]
struct SymbolChain {
    /// Pair r for r = 1..n-2, as (L_r, R_r); `None` once swapped in.
    pairs: Vec<Option<StateRegister>>,
    /// Pair whose far end is R_{n-1}, held by B_n. Starts as pair n-1.
    link: StateRegister,
    terminal: Option<StateRegister>,
}

#[derive(Serialize)]
struct Transcript<'a> {
    params: &'a ChainParams,
    ledger: &'a LedgerRecord,
}

/// A running n-block chain: live registers, local key material and the
/// public ledger. All quantum events go through this value in order.
#[derive(Debug, Clone)]
pub struct ChainState {
    params: ChainParams,
    data: Option<DitString>,
    symbols: Vec<SymbolChain>,
    pending: Vec<BlockId>,
    keys: BTreeMap<BlockId, BlockKeyPair>,
    in_transit: BTreeMap<(BlockId, BlockId), Vec<StateRegister>>,
    exclusive: Option<Vec<BellLabel>>,
    b1_measured_at: Option<u64>,
    reconstructed: BTreeMap<BlockId, Identity>,
    passed: BTreeMap<BlockId, bool>,
    halted: bool,
    ledger: LedgerRecord,
}

/// Prepares the per-symbol chains of time-bin Bell pairs.
pub fn build_time_chain(params: ChainParams) -> Result<ChainState> {
    ChainState::build(params)
}

impl ChainState {
    pub fn build(params: ChainParams) -> Result<Self> {
        let params = ChainParams::with_cap(params.n_blocks, params.dim, params.m_symbols, params.amplitude_cap)?;
        let n = params.n_blocks;
        let pair = |r: usize| -> Result<StateRegister> {
            let early = (r as u32, BlockId(r as u32));
            let late = (r as u32 + 1, BlockId(r as u32 + 1));
            Ok(timebin_encode_owned(params.dim, 0, 0, early, late)?.state)
        };
        let symbols = (0..params.m_symbols)
            .map(|_| {
                Ok(SymbolChain {
                    pairs: (1..n - 1).map(|r| pair(r).map(Some)).collect::<Result<_>>()?,
                    link: pair(n - 1)?,
                    terminal: None,
                })
            })
            .collect::<Result<_>>()?;
        let mut ledger = LedgerRecord::default();
        ledger.log(
            Actor::System,
            Action::Prepare,
            format!("{} time-bin pairs per symbol, {} symbols", n - 1, params.m_symbols),
        );
        Ok(ChainState {
            params,
            data: None,
            symbols,
            pending: (1..n as u32).rev().map(BlockId).collect(),
            keys: BTreeMap::new(),
            in_transit: BTreeMap::new(),
            exclusive: None,
            b1_measured_at: None,
            reconstructed: BTreeMap::new(),
            passed: BTreeMap::new(),
            halted: false,
            ledger,
        })
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn ledger(&self) -> &LedgerRecord {
        &self.ledger
    }

    pub fn data(&self) -> Option<&DitString> {
        self.data.as_ref()
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    /// Blocks whose Bell measurement is still due, next first.
    pub fn pending_hdbm(&self) -> &[BlockId] {
        &self.pending
    }

    /// Number of pending Bell measurements counted per symbol.
    pub fn pending_events(&self) -> usize {
        self.pending.len() * self.params.m_symbols
    }

    /// Local key material of `block`, if it has measured.
    pub fn private_keys(&self, block: BlockId) -> Option<&BlockKeyPair> {
        self.keys.get(&block)
    }

    pub fn reconstructed_identity(&self, block: BlockId) -> Option<&Identity> {
        self.reconstructed.get(&block)
    }

    fn check_block(&self, b: BlockId) -> Result<()> {
        if b.0 == 0 || b.0 as usize > self.params.n_blocks {
            return Err(Error::domain(format!("{b} is not part of a {}-block chain", self.params.n_blocks)));
        }
        Ok(())
    }

    fn is_intermediate(&self, b: BlockId) -> bool {
        b.0 >= 2 && (b.0 as usize) < self.params.n_blocks
    }

    /// Loads B_1's data. Must happen before B_1 measures.
    pub fn set_block_data(&mut self, data: DitString) -> Result<()> {
        if data.dim() != self.params.dim || data.len() != self.params.m_symbols {
            return Err(Error::domain(format!(
                "data over Z_{} with {} symbols does not fit a chain over Z_{} with {}",
                data.dim(),
                data.len(),
                self.params.dim,
                self.params.m_symbols
            )));
        }
        if self.b1_measured_at.is_some() {
            return Err(Error::ordering("B1 has already measured its data"));
        }
        self.data = Some(data);
        Ok(())
    }

    /// Runs `block`'s Bell measurement on every symbol and stores its keys.
    ///
    /// Intermediate blocks swap the link towards B_n onto the next pair;
    /// B_1 measures its identity qudit with the link, which teleports the
    /// identity to B_n.
    pub fn generate_keys(&mut self, block: BlockId, rng: &mut SimRng) -> Result<BlockKeyPair> {
        self.check_block(block)?;
        match self.pending.first() {
            Some(&next) if next == block => {}
            Some(&next) => return Err(Error::ordering(format!("{block} measured while {next} is due"))),
            None => return Err(Error::ordering(format!("{block} measured after all Bell measurements"))),
        }
        let dim = self.params.dim;
        let cap = self.params.amplitude_cap;
        let k = block.0 as usize;
        let mut outcomes = Vec::with_capacity(self.params.m_symbols);
        let mut updated = self.symbols.clone();
        if k >= 2 {
            for sym in &mut updated {
                let pair = sym.pairs[k - 2].take().ok_or_else(|| Error::ordering(format!("pair {} already consumed", k - 1)))?;
                let joint = pair.tensor_with_cap(&sym.link, cap)?;
                let (outcome, post) = hdbm(&joint, [1, 2], rng)?;
                sym.link = discard_bell_pair(&post, [1, 2], outcome)?;
                outcomes.push(key_from_outcome(dim, outcome));
            }
        } else {
            let data = self.data.as_ref().ok_or_else(|| Error::IncompleteInput("B1 has no data to measure".into()))?;
            for (sym, &d) in updated.iter_mut().zip(data.symbols()) {
                let xi = identity_state(dim, d)?.with_tags(&[QuditTag::new(0, BlockId(1))])?;
                let joint = xi.tensor_with_cap(&sym.link, cap)?;
                let (outcome, post) = hdbm(&joint, [0, 1], rng)?;
                sym.terminal = Some(discard_bell_pair(&post, [0, 1], outcome)?);
                outcomes.push(key_from_outcome(dim, outcome));
            }
        }
        self.symbols = updated;
        self.pending.remove(0);
        let detail = if k >= 2 {
            format!("{block} Bell-measures R{} with L{k}", k - 1)
        } else {
            "B1 Bell-measures its identity qudit with L1".to_string()
        };
        let at = self.ledger.log(Actor::Block(block), Action::Hdbm, detail);
        if k == 1 {
            self.b1_measured_at = Some(at);
        }
        let pair = BlockKeyPair::from_pairs(block, dim, outcomes);
        self.keys.insert(block, pair.clone());
        Ok(pair)
    }

    fn sender_keys(&self, from: BlockId) -> Result<&BlockKeyPair> {
        if !self.is_intermediate(from) {
            return Err(Error::domain(format!("{from} does not broadcast a public key")));
        }
        self.keys.get(&from).ok_or_else(|| Error::ordering(format!("{from} broadcasts before measuring")))
    }

    fn check_recipient(&self, from: BlockId, to: BlockId) -> Result<()> {
        self.check_block(to)?;
        if to == BlockId(1) {
            return Err(Error::domain("B1 never receives public keys"));
        }
        if to == from {
            return Err(Error::domain(format!("{from} cannot send its key to itself")));
        }
        Ok(())
    }

    /// Superdense-encodes `from`'s public key onto fresh Bell pairs bound
    /// for `to`. The carriers stay in transit until received.
    pub fn send_public_key(&mut self, from: BlockId, to: BlockId) -> Result<()> {
        self.check_recipient(from, to)?;
        let key = self.sender_keys(from)?.public_key.clone();
        let tags = [QuditTag::new(0, to), QuditTag::new(0, to)];
        let carriers = key
            .iter()
            .map(|&msg| superdense_encode(&bell_state(self.params.dim, 0, 0)?.with_tags(&tags)?, msg))
            .collect::<Result<Vec<_>>>()?;
        self.in_transit.insert((from, to), carriers);
        self.ledger.log(Actor::Block(from), Action::Broadcast, format!("{from} sends its public key to {to}"));
        Ok(())
    }

    /// Decodes carriers in transit from `from` to `to`. Returns whether the
    /// decoded key matches what the sender sent; a mismatch is recorded.
    pub fn receive_public_key(&mut self, from: BlockId, to: BlockId, rng: &mut SimRng) -> Result<bool> {
        let carriers = self
            .in_transit
            .remove(&(from, to))
            .ok_or_else(|| Error::ordering(format!("nothing in transit from {from} to {to}")))?;
        let key = carriers.iter().map(|c| superdense_decode(c, rng)).collect::<Result<Vec<_>>>()?;
        let matches_sent = key == self.sender_keys(from)?.public_key;
        self.ledger.received_keys.push(ReceivedKey { from, to, key, matches_sent });
        let note = if matches_sent { "" } else { " (decode mismatch)" };
        self.ledger.log(Actor::Block(to), Action::Broadcast, format!("{to} decodes the public key of {from}{note}"));
        Ok(matches_sent)
    }

    /// Sends and receives `from`'s key for every recipient in turn.
    pub fn broadcast_public_key(&mut self, from: BlockId, recipients: &[BlockId], rng: &mut SimRng) -> Result<()> {
        for &to in recipients {
            self.check_recipient(from, to)?;
        }
        for &to in recipients {
            self.send_public_key(from, to)?;
            self.receive_public_key(from, to, rng)?;
        }
        Ok(())
    }

    /// Measures the in-transit carrier of each listed symbol on the way
    /// from `from` to `to` in `basis` and lets the collapsed state travel
    /// on. Returns the observed basis indices.
    pub fn intercept_broadcast(
        &mut self,
        from: BlockId,
        to: BlockId,
        symbols: &[usize],
        basis: &[Vec<C64>],
        rng: &mut SimRng,
    ) -> Result<Vec<usize>> {
        let carriers = self
            .in_transit
            .get_mut(&(from, to))
            .ok_or_else(|| Error::ordering(format!("nothing in transit from {from} to {to}")))?;
        let mut seen = Vec::with_capacity(symbols.len());
        for &i in symbols {
            let c = carriers.get_mut(i).ok_or_else(|| Error::domain(format!("symbol {i} out of range")))?;
            let (outcome, collapsed) = measure_projective(c, basis, &[1], rng)?;
            *c = collapsed;
            seen.push(outcome.index);
        }
        self.ledger.log(Actor::Adversary, Action::Attack, format!("intercept on {from} -> {to}"));
        Ok(seen)
    }

    /// Measures R_r, the qudit of pair r travelling to B_{r+1}, on each
    /// listed symbol. Only possible before the pair is swapped in.
    pub fn intercept_link(&mut self, r: usize, symbols: &[usize], basis: &[Vec<C64>], rng: &mut SimRng) -> Result<Vec<usize>> {
        let n = self.params.n_blocks;
        if r == 0 || r >= n {
            return Err(Error::domain(format!("there is no chain link {r}")));
        }
        let untouched_link = self.pending.len() == n - 1;
        let mut seen = Vec::with_capacity(symbols.len());
        for &i in symbols {
            let sym = self.symbols.get_mut(i).ok_or_else(|| Error::domain(format!("symbol {i} out of range")))?;
            let reg = if r == n - 1 {
                if !untouched_link {
                    return Err(Error::domain(format!("R{r} was already used by a Bell measurement")));
                }
                &mut sym.link
            } else {
                sym.pairs[r - 1].as_mut().ok_or_else(|| Error::domain(format!("R{r} was already used by a Bell measurement")))?
            };
            let (outcome, collapsed) = measure_projective(reg, basis, &[1], rng)?;
            *reg = collapsed;
            seen.push(outcome.index);
        }
        self.ledger.log(Actor::Adversary, Action::Attack, format!("intercept on chain link R{r}"));
        Ok(seen)
    }

    /// Records an adversary action in the event log.
    pub fn note_attack(&mut self, detail: impl Into<String>) {
        self.ledger.log(Actor::Adversary, Action::Attack, detail);
    }

    /// Gives B_n exclusive access to B_1's key pair.
    pub fn share_exclusive(&mut self) -> Result<()> {
        let key = self.keys.get(&BlockId(1)).ok_or_else(|| Error::ordering("B1 shares its key before measuring"))?;
        self.exclusive = Some(key.public_key.clone());
        let last = self.params.last_block();
        self.ledger.log(Actor::Block(BlockId(1)), Action::Transmit, format!("B1 shares its key pair with {last} only"));
        Ok(())
    }

    /// Publishes `U†_(B1 key) M|data>` per symbol, time-stamped with B_1's
    /// measurement.
    pub fn publish_global_identity(&mut self) -> Result<Identity> {
        let at = self.b1_measured_at.ok_or_else(|| Error::ordering("global identity published before B1 measured"))?;
        let data = self.data.as_ref().ok_or_else(|| Error::IncompleteInput("no block data".into()))?;
        let key = &self.keys[&BlockId(1)].private_key;
        let states = global_identity_states(data, key)?
            .into_iter()
            .map(|s| s.with_tags(&[QuditTag::new(0, BlockId(1))]))
            .collect::<Result<_>>()?;
        let id = Identity { owner: BlockId(1), timestamp: at, basis: IDENTITY_BASIS.into(), states };
        self.ledger.published = Some(id.clone());
        self.ledger.log(Actor::Block(BlockId(1)), Action::Publish, "B1 publishes its global identity");
        Ok(id)
    }

    fn published(&self) -> Result<&Identity> {
        self.ledger.published.as_ref().ok_or_else(|| Error::ordering("no global identity has been published"))
    }

    /// Key lists `block` holds, by owner: decoded broadcasts, its own key
    /// and, for B_n, B_1's key from the exclusive channel.
    pub fn keys_held_by(&self, block: BlockId) -> BTreeMap<BlockId, Vec<BellLabel>> {
        let mut held = self.ledger.keys_held_by(block);
        if let Some(own) = self.keys.get(&block) {
            held.insert(block, own.private_key.clone());
        }
        if block == self.params.last_block() {
            if let Some(k) = &self.exclusive {
                held.insert(BlockId(1), k.clone());
            }
        }
        held
    }

    /// Per-symbol sum, as known to `at`, of the intermediate keys
    /// B_2..B_{n-1} other than `excluding`.
    pub fn intermediate_sum(&self, at: BlockId, excluding: Option<BlockId>) -> Result<Vec<BellLabel>> {
        let held = self.keys_held_by(at);
        let m = self.params.m_symbols;
        let mut lists = Vec::new();
        for r in self.params.intermediates().filter(|&r| Some(r) != excluding) {
            let k = held.get(&r).ok_or_else(|| Error::IncompleteInput(format!("{at} holds no key of {r}")))?;
            lists.push(k.as_slice());
        }
        super::identity::key_sums(self.params.dim, m, lists)
    }

    /// B_n undoes the accumulated frame `U_(sum of all keys)` on the
    /// teleported identity and maps it back to the computational basis.
    pub fn reconstruct_data(&self, receiver: BlockId) -> Result<StateRegister> {
        self.reconstruct_data_with(receiver, &self.keys_held_by(receiver))
    }

    /// [`Self::reconstruct_data`] with an explicit key list per block
    /// B_1..B_{n-1}, e.g. keys as an eavesdropper altered them.
    pub fn reconstruct_data_with(&self, receiver: BlockId, keys: &BTreeMap<BlockId, Vec<BellLabel>>) -> Result<StateRegister> {
        let last = self.params.last_block();
        if receiver != last {
            return Err(Error::domain(format!("only {last} holds the terminal qudits")));
        }
        let mut lists = Vec::new();
        for r in (1..last.0).map(BlockId) {
            let k = keys.get(&r).ok_or_else(|| Error::IncompleteInput(format!("no key of {r}")))?;
            lists.push(k.as_slice());
        }
        let total = super::identity::key_sums(self.params.dim, self.params.m_symbols, lists)?;
        let unmix = Operator::identity_basis(self.params.dim)?.adjoint();
        let mut out: Option<StateRegister> = None;
        for (sym, k) in self.symbols.iter().zip(&total) {
            let t = sym.terminal.as_ref().ok_or_else(|| Error::ordering("chain measurements are not complete"))?;
            let corrected = Operator::bell_xform(self.params.dim, k.x, k.y)?.adjoint().apply(t, &[0])?;
            let plain = unmix.apply(&corrected, &[0])?;
            out = Some(match out {
                None => plain,
                Some(acc) => acc.tensor_with_cap(&plain, self.params.amplitude_cap)?,
            });
        }
        Ok(out.expect("at least one symbol"))
    }

    /// B_n measures the reconstructed data and assembles the triple it
    /// validates first: data, B_1's key and the published identity.
    pub fn receive_data(&mut self, rng: &mut SimRng) -> Result<TransmissionTriple> {
        let last = self.params.last_block();
        let mut reg = self.reconstruct_data(last)?;
        let mut symbols = Vec::with_capacity(self.params.m_symbols);
        for q in 0..reg.num_qudits() {
            let (o, post) = measure_computational(&reg, q, rng)?;
            symbols.push(o.index);
            reg = post;
        }
        let triple = TransmissionTriple {
            data: DitString::new(self.params.dim, symbols)?,
            sender_public_key: self.exclusive.clone().expect("checked by reconstruct_data"),
            forwarded_identity: self.published()?.clone(),
        };
        self.ledger.log(Actor::Block(BlockId(1)), Action::Transmit, format!("B1 -> {last}: data, key, identity"));
        Ok(triple)
    }

    fn record(&mut self, block: BlockId, v1: Vec<Verdict>, v2: Vec<Verdict>, identity: Identity, detail: String) -> bool {
        let ok = all_pass(&v1) && all_pass(&v2);
        let t = self.ledger.log(Actor::Block(block), Action::Validate, detail);
        self.ledger.verdicts.push(VerdictRecord { time_index: t, block, check: Check::V1, verdicts: v1 });
        self.ledger.verdicts.push(VerdictRecord { time_index: t, block, check: Check::V2, verdicts: v2 });
        let identity = Identity { timestamp: t, ..identity };
        self.reconstructed.insert(block, identity);
        self.passed.insert(block, ok);
        if !ok {
            self.halted = true;
        }
        ok
    }

    fn sum_owners(&self, excluding: Option<BlockId>) -> String {
        let owners: Vec<String> = self.params.intermediates().filter(|&r| Some(r) != excluding).map(|r| r.to_string()).collect();
        if owners.is_empty() {
            "none".into()
        } else {
            owners.join(",")
        }
    }

    /// Both checks `to` would run on `triple`, without recording anything.
    ///
    /// `from = None` is B_n receiving from B_1: the reference for the
    /// identity check is the published identity. Otherwise `to` is an
    /// intermediate block and the forwarded identity is mapped back into the
    /// published frame with the forwarder's key offset.
    pub fn inspect_triple(
        &self,
        triple: &TransmissionTriple,
        from: Option<BlockId>,
        to: BlockId,
    ) -> Result<(Vec<Verdict>, Vec<Verdict>, Identity)> {
        let published = self.published()?;
        let v1 = validate_1(triple, published);
        match from {
            None => {
                let last = self.params.last_block();
                if to != last {
                    return Err(Error::domain(format!("only {last} receives directly from B1")));
                }
                let sums = self.intermediate_sum(last, None)?;
                let rec = reconstruct_identity(published, &sums, last, 0)?;
                let v2 = validate_2(&rec, published, &sums);
                Ok((v1, v2, rec))
            }
            Some(from) => {
                self.check_block(from)?;
                if !self.is_intermediate(to) || to.0 + 1 != from.0 {
                    return Err(Error::domain(format!(
                        "triples travel from B_(l+1) to an intermediate B_l, not {from} -> {to}"
                    )));
                }
                let from_sums = self.intermediate_sum(to, Some(from))?;
                let own_sums = self.intermediate_sum(to, Some(to))?;
                let rec = reconstruct_identity(published, &own_sums, to, 0)?;
                let v2 = match apply_keys(&triple.forwarded_identity.states, &from_sums) {
                    Ok(states) => {
                        let reference = Identity { states, ..triple.forwarded_identity.clone() };
                        validate_2(&rec, &reference, &own_sums)
                    }
                    Err(_) => vec![Verdict::Fail; self.params.m_symbols],
                };
                Ok((v1, v2, rec))
            }
        }
    }

    /// B_n's checks on the triple it received from B_1.
    pub fn validate_at_last(&mut self, triple: &TransmissionTriple) -> Result<bool> {
        if self.halted {
            return Err(Error::ProtocolViolation("the chain halted after a failed check".into()));
        }
        let last = self.params.last_block();
        let (v1, v2, rec) = self.inspect_triple(triple, None, last)?;
        let detail = format!("{last} validates; identity sum over keys of {}", self.sum_owners(None));
        Ok(self.record(last, v1, v2, rec, detail))
    }

    /// Triple `from` sends on: the received data and key with its own
    /// reconstructed identity.
    pub fn outgoing_triple(&self, received: &TransmissionTriple, from: BlockId) -> Result<TransmissionTriple> {
        if self.halted {
            return Err(Error::ProtocolViolation("the chain halted after a failed check".into()));
        }
        match self.passed.get(&from) {
            Some(true) => {}
            Some(false) => return Err(Error::ProtocolViolation(format!("{from} failed validation"))),
            None => return Err(Error::ordering(format!("{from} forwards before validating"))),
        }
        Ok(TransmissionTriple { forwarded_identity: self.reconstructed[&from].clone(), ..received.clone() })
    }

    /// `to` validates a triple forwarded by `from = to + 1`.
    pub fn deliver(&mut self, triple: &TransmissionTriple, from: BlockId, to: BlockId) -> Result<bool> {
        if self.halted {
            return Err(Error::ProtocolViolation("the chain halted after a failed check".into()));
        }
        if self.passed.get(&from) != Some(&true) {
            return Err(Error::ProtocolViolation(format!("{from} has not passed validation")));
        }
        let (v1, v2, rec) = self.inspect_triple(triple, Some(from), to)?;
        let detail = format!("{to} validates triple from {from}; identity sum over keys of {}", self.sum_owners(Some(to)));
        Ok(self.record(to, v1, v2, rec, detail))
    }

    /// Forwards from `from` to `to` and runs `to`'s checks.
    pub fn propagate(&mut self, received: &TransmissionTriple, from: BlockId, to: BlockId) -> Result<bool> {
        let out = self.outgoing_triple(received, from)?;
        self.deliver(&out, from, to)
    }

    /// Serialization of the parameters and the ledger used for golden
    /// transcripts.
    pub fn transcript_json(&self) -> String {
        serde_json::to_string_pretty(&Transcript { params: &self.params, ledger: &self.ledger })
            .expect("transcripts always serialize")
    }

    pub fn transcript_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.transcript_json().as_bytes()))
    }

    pub fn into_ledger(self) -> LedgerRecord {
        self.ledger
    }
}

/// Result of a full honest run.
#[derive(Debug, Clone)]
pub struct HonestRun {
    pub chain: ChainState,
    pub triple: TransmissionTriple,
    /// Reconstructed data register at B_n, before its measurement.
    pub reconstructed: StateRegister,
    pub all_pass: bool,
}

/// Runs key generation, broadcasts, publication, reconstruction and the
/// whole validation sequence with no adversary.
pub fn run_honest(params: ChainParams, data: DitString, rng: &mut SimRng) -> Result<HonestRun> {
    let mut chain = ChainState::build(params)?;
    chain.set_block_data(data)?;
    let n = params.n_blocks as u32;
    for k in (2..n).rev() {
        chain.generate_keys(BlockId(k), rng)?;
    }
    chain.generate_keys(BlockId(1), rng)?;
    for k in 2..n {
        let from = BlockId(k);
        chain.broadcast_public_key(from, &params.default_recipients(from), rng)?;
    }
    chain.share_exclusive()?;
    chain.publish_global_identity()?;
    let reconstructed = chain.reconstruct_data(BlockId(n))?;
    let triple = chain.receive_data(rng)?;
    let mut ok = chain.validate_at_last(&triple)?;
    let mut k = n;
    while ok && k > 2 {
        ok = chain.propagate(&triple, BlockId(k), BlockId(k - 1))?;
        k -= 1;
    }
    Ok(HonestRun { chain, triple, reconstructed, all_pass: ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::identity::encode_block_data;

    #[test]
    fn params_are_checked() {
        assert!(ChainParams::new(2, 2, 1).is_err());
        assert!(ChainParams::new(3, 1, 1).is_err());
        assert!(ChainParams::new(3, 2, 0).is_err());
        assert!(matches!(ChainParams::with_cap(3, 5, 1, 600), Err(Error::Resource { .. })));
    }

    #[test]
    fn pending_order_is_descending() {
        let c = build_time_chain(ChainParams::new(4, 2, 1).unwrap()).unwrap();
        assert_eq!(c.pending_hdbm(), &[BlockId(3), BlockId(2), BlockId(1)]);
        assert_eq!(build_time_chain(ChainParams::new(3, 3, 2).unwrap()).unwrap().pending_events(), 4);
    }

    #[test]
    fn out_of_order_measurement_is_rejected() {
        let mut c = build_time_chain(ChainParams::new(4, 3, 1).unwrap()).unwrap();
        let mut rng = SimRng::from_seed(1);
        assert!(matches!(c.generate_keys(BlockId(2), &mut rng), Err(Error::Ordering(_))));
        assert!(matches!(c.generate_keys(BlockId(4), &mut rng), Err(Error::Ordering(_))));
        c.generate_keys(BlockId(3), &mut rng).unwrap();
        assert!(matches!(c.generate_keys(BlockId(3), &mut rng), Err(Error::Ordering(_))));
    }

    #[test]
    fn honest_run_recovers_data() {
        for seed in 0..20 {
            let mut rng = SimRng::from_seed(seed);
            let params = ChainParams::new(5, 3, 2).unwrap();
            let data = DitString::random(3, 2, &mut rng).unwrap();
            let run = run_honest(params, data.clone(), &mut rng).unwrap();
            assert!(run.all_pass, "seed {seed}");
            let expected = encode_block_data(&data, 1 << 10).unwrap();
            assert!(run.reconstructed.fidelity(&expected).unwrap() > 1.0 - 1e-9);
            assert_eq!(run.triple.data, data);
        }
    }

    #[test]
    fn b1_is_never_a_recipient() {
        let mut c = build_time_chain(ChainParams::new(4, 2, 1).unwrap()).unwrap();
        let mut rng = SimRng::from_seed(0);
        c.generate_keys(BlockId(3), &mut rng).unwrap();
        assert!(c.broadcast_public_key(BlockId(3), &[BlockId(1)], &mut rng).is_err());
        assert!(c.broadcast_public_key(BlockId(3), &[BlockId(3)], &mut rng).is_err());
    }
}
