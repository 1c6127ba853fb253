//! Logical-time event schedules and their execution against a chain.
//!
//! Every event names the resources it needs and the ones it creates. A
//! schedule is rejected up front when time indices repeat, a resource has
//! two producers or the dependencies form a cycle; at run time an event
//! whose inputs do not exist yet raises an ordering error.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::collusion::{forge_and_present, ForgeryResult};
use super::scenario::{AttackScenario, Channel, CollusionStrategy, KeyComponent, MeasureBasis};
use crate::chain::{Action, Actor, ChainParams, ChainState, DitString, TransmissionTriple};
use crate::entangle::BellLabel;
use crate::qudit::{BlockId, Operator};
use crate::rng::SimRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    /// Chain pair r, not yet swapped in.
    Pair(usize),
    /// Link from L_k to B_n.
    Link(usize),
    Keys(BlockId),
    Terminal,
    InTransit(BlockId, BlockId),
    Received(BlockId, BlockId),
    Exclusive,
    Published,
    /// A triple waiting for this block's checks.
    Triple(BlockId),
    Verdict(BlockId),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TamperTarget {
    Data { symbol: usize, delta: usize },
    Key { symbol: usize, component: KeyComponent, delta: usize },
    Identity { symbol: usize, delta: BellLabel },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackStep {
    InterceptBroadcast { from: BlockId, to: BlockId, symbols: Vec<usize>, basis: MeasureBasis },
    InterceptLink { r: usize, symbols: Vec<usize>, basis: MeasureBasis },
    /// Alters the triple waiting at `to`.
    Tamper { to: BlockId, target: TamperTarget },
    Forge { colluders: Vec<BlockId>, strategy: CollusionStrategy, offset: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    Prepare,
    Measure(BlockId),
    Send { from: BlockId, to: BlockId },
    Receive { from: BlockId, to: BlockId },
    ShareExclusive,
    Publish,
    TransmitData,
    Validate(BlockId),
    Forward { from: BlockId, to: BlockId },
    Attack(AttackStep),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub time_index: u64,
    pub actor: Actor,
    pub action: Action,
    pub step: Step,
}

impl Event {
    pub fn new(time_index: u64, step: Step) -> Self {
        let (actor, action) = match &step {
            Step::Prepare => (Actor::System, Action::Prepare),
            Step::Measure(b) => (Actor::Block(*b), Action::Hdbm),
            Step::Send { from, .. } => (Actor::Block(*from), Action::Broadcast),
            Step::Receive { to, .. } => (Actor::Block(*to), Action::Broadcast),
            Step::ShareExclusive => (Actor::Block(BlockId(1)), Action::Transmit),
            Step::Publish => (Actor::Block(BlockId(1)), Action::Publish),
            Step::TransmitData => (Actor::Block(BlockId(1)), Action::Transmit),
            Step::Validate(b) => (Actor::Block(*b), Action::Validate),
            Step::Forward { from, .. } => (Actor::Block(*from), Action::Transmit),
            Step::Attack(_) => (Actor::Adversary, Action::Attack),
        };
        Event { time_index, actor, action, step }
    }

    pub fn requires(&self, params: &ChainParams) -> Vec<Resource> {
        let n = params.n_blocks;
        let last = params.last_block();
        match &self.step {
            Step::Prepare => vec![],
            Step::Measure(b) if b.0 >= 2 => vec![Resource::Pair(b.0 as usize - 1), Resource::Link(b.0 as usize)],
            Step::Measure(_) => vec![Resource::Link(1)],
            Step::Send { from, .. } => vec![Resource::Keys(*from)],
            Step::Receive { from, to } => vec![Resource::InTransit(*from, *to)],
            Step::ShareExclusive | Step::Publish => vec![Resource::Keys(BlockId(1))],
            Step::TransmitData => {
                let mut r = vec![Resource::Terminal, Resource::Exclusive, Resource::Published];
                r.extend(params.intermediates().map(|b| Resource::Received(b, last)));
                r
            }
            Step::Validate(b) => {
                let mut r = vec![Resource::Triple(*b), Resource::Published];
                r.extend(params.intermediates().filter(|i| i != b).map(|i| Resource::Received(i, *b)));
                r
            }
            Step::Forward { from, .. } => vec![Resource::Verdict(*from)],
            Step::Attack(a) => match a {
                AttackStep::InterceptBroadcast { from, to, .. } => vec![Resource::InTransit(*from, *to)],
                AttackStep::InterceptLink { r, .. } if *r + 1 == n => vec![Resource::Link(n - 1)],
                AttackStep::InterceptLink { r, .. } => vec![Resource::Pair(*r)],
                AttackStep::Tamper { to, .. } => vec![Resource::Triple(*to)],
                AttackStep::Forge { .. } => vec![Resource::Published],
            },
        }
    }

    pub fn produces(&self, params: &ChainParams) -> Vec<Resource> {
        let n = params.n_blocks;
        match &self.step {
            Step::Prepare => {
                let mut r: Vec<Resource> = (1..n - 1).map(Resource::Pair).collect();
                r.push(Resource::Link(n - 1));
                r
            }
            Step::Measure(b) if b.0 >= 2 => vec![Resource::Link(b.0 as usize - 1), Resource::Keys(*b)],
            Step::Measure(b) => vec![Resource::Keys(*b), Resource::Terminal],
            Step::Send { from, to } => vec![Resource::InTransit(*from, *to)],
            Step::Receive { from, to } => vec![Resource::Received(*from, *to)],
            Step::ShareExclusive => vec![Resource::Exclusive],
            Step::Publish => vec![Resource::Published],
            Step::TransmitData => vec![Resource::Triple(params.last_block())],
            Step::Validate(b) => vec![Resource::Verdict(*b)],
            Step::Forward { to, .. } => vec![Resource::Triple(*to)],
            Step::Attack(_) => vec![],
        }
    }
}

/// Events of one chain run, keyed by their logical time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub params: ChainParams,
    pub events: Vec<Event>,
}

impl Schedule {
    /// Builds a schedule whose time indices follow the order of `steps`.
    pub fn from_steps(params: ChainParams, steps: Vec<Step>) -> Self {
        let events = steps.into_iter().enumerate().map(|(i, s)| Event::new(i as u64, s)).collect();
        Schedule { params, events }
    }

    pub fn steps(&self) -> Vec<Step> {
        let mut ev: Vec<&Event> = self.events.iter().collect();
        ev.sort_by_key(|e| e.time_index);
        ev.into_iter().map(|e| e.step.clone()).collect()
    }

    /// Adds an event; equal time indices are caught by [`Self::validate`].
    pub fn schedule(&mut self, event: Event) {
        self.events.push(event);
    }

    /// Structural checks that do not depend on execution.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut seen = BTreeSet::new();
        for e in &self.events {
            if !seen.insert(e.time_index) {
                problems.push(format!("two events at time index {}", e.time_index));
            }
        }
        let mut producer: BTreeMap<Resource, usize> = BTreeMap::new();
        for (i, e) in self.events.iter().enumerate() {
            for r in e.produces(&self.params) {
                if producer.insert(r, i).is_some() {
                    problems.push(format!("{r:?} is produced twice"));
                }
            }
        }
        // Kahn's algorithm over producer -> consumer edges.
        let len = self.events.len();
        let mut indegree = vec![0usize; len];
        let mut edges = vec![Vec::new(); len];
        for (i, e) in self.events.iter().enumerate() {
            for r in e.requires(&self.params) {
                if let Some(&p) = producer.get(&r) {
                    edges[p].push(i);
                    indegree[i] += 1;
                }
            }
        }
        let mut ready: Vec<usize> = (0..len).filter(|&i| indegree[i] == 0).collect();
        let mut done = 0;
        while let Some(i) = ready.pop() {
            done += 1;
            for &j in &edges[i] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
        if done != len {
            problems.push("event dependencies form a cycle".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

/// The honest schedule: Bell measurements from B_(n-1) down to B_1, key
/// broadcasts, the exclusive share, publication, transmission to B_n and
/// validation back down to B_2.
pub fn honest_steps(params: &ChainParams) -> Vec<Step> {
    let n = params.n_blocks as u32;
    let mut steps = vec![Step::Prepare];
    steps.extend((1..n).rev().map(|k| Step::Measure(BlockId(k))));
    for from in params.intermediates() {
        for to in params.default_recipients(from) {
            steps.push(Step::Send { from, to });
            steps.push(Step::Receive { from, to });
        }
    }
    steps.extend([Step::ShareExclusive, Step::Publish, Step::TransmitData, Step::Validate(BlockId(n))]);
    for l in (2..n).rev() {
        steps.push(Step::Forward { from: BlockId(l + 1), to: BlockId(l) });
        steps.push(Step::Validate(BlockId(l)));
    }
    steps
}

pub fn honest_schedule(params: ChainParams) -> Schedule {
    Schedule::from_steps(params, honest_steps(&params))
}

fn insert_after(steps: &mut Vec<Step>, anchor: &Step, step: Step) -> Result<()> {
    let i = steps.iter().position(|s| s == anchor).ok_or_else(|| Error::domain(format!("no {anchor:?} in schedule")))?;
    steps.insert(i + 1, step);
    Ok(())
}

/// Honest schedule with `scenario`'s adversary events woven in.
pub fn attack_schedule(params: ChainParams, scenario: &AttackScenario) -> Result<Schedule> {
    let problems = scenario.violations(&params);
    if !problems.is_empty() {
        return Err(Error::Config(problems));
    }
    let mut steps = honest_steps(&params);
    let last = params.last_block();
    let tamper_anchor = |at: BlockId| {
        if at == BlockId(1) {
            (Step::TransmitData, last)
        } else {
            let to = BlockId(at.0 - 1);
            (Step::Forward { from: at, to }, to)
        }
    };
    match scenario {
        AttackScenario::Honest => {}
        AttackScenario::InterceptResend { symbols, basis, .. } => match scenario.channel(&params).expect("intercept") {
            Channel::Broadcast { from, to } => {
                let step = AttackStep::InterceptBroadcast { from, to, symbols: symbols.clone(), basis: *basis };
                insert_after(&mut steps, &Step::Send { from, to }, Step::Attack(step))?;
            }
            Channel::ChainLink(r) => {
                let step = AttackStep::InterceptLink { r, symbols: symbols.clone(), basis: *basis };
                insert_after(&mut steps, &Step::Prepare, Step::Attack(step))?;
            }
        },
        AttackScenario::TamperData { at, symbol, delta } => {
            let (anchor, to) = tamper_anchor(*at);
            let target = TamperTarget::Data { symbol: *symbol, delta: *delta };
            insert_after(&mut steps, &anchor, Step::Attack(AttackStep::Tamper { to, target }))?;
        }
        AttackScenario::TamperKey { at, symbol, component, delta } => {
            let (anchor, to) = tamper_anchor(*at);
            let target = TamperTarget::Key { symbol: *symbol, component: *component, delta: *delta };
            insert_after(&mut steps, &anchor, Step::Attack(AttackStep::Tamper { to, target }))?;
        }
        AttackScenario::TamperIdentity { at, symbol, delta } => {
            let (anchor, to) = tamper_anchor(*at);
            let target = TamperTarget::Identity { symbol: *symbol, delta: *delta };
            insert_after(&mut steps, &anchor, Step::Attack(AttackStep::Tamper { to, target }))?;
        }
        AttackScenario::Collusion { colluders, strategy, forged_offset } => {
            let cut = steps.iter().position(|s| *s == Step::Publish).expect("publish step") + 1;
            steps.truncate(cut);
            steps.push(Step::Attack(AttackStep::Forge {
                colluders: colluders.clone(),
                strategy: *strategy,
                offset: *forged_offset,
            }));
        }
        AttackScenario::TimingViolation { block } => {
            let i = steps.iter().position(|s| *s == Step::Measure(*block)).expect("measure step");
            let s = steps.remove(i);
            steps.insert(1, s);
        }
    }
    Ok(Schedule::from_steps(params, steps))
}

/// What an executed schedule left behind besides the chain itself.
#[derive(Debug, Clone, Default)]
pub struct Execution {
    /// Basis indices the adversary observed, in event order.
    pub observations: Vec<usize>,
    pub forgery: Option<ForgeryResult>,
}

fn tamper(triple: &mut TransmissionTriple, target: &TamperTarget, dim: usize) -> Result<()> {
    match *target {
        TamperTarget::Data { symbol, delta } => triple.data = triple.data.shifted(symbol, delta)?,
        TamperTarget::Key { symbol, component, delta } => {
            let k = triple
                .sender_public_key
                .get_mut(symbol)
                .ok_or_else(|| Error::domain(format!("symbol {symbol} out of range")))?;
            match component {
                KeyComponent::X => k.x = (k.x + delta) % dim,
                KeyComponent::Y => k.y = (k.y + delta) % dim,
            }
        }
        TamperTarget::Identity { symbol, delta } => {
            let s = triple
                .forwarded_identity
                .states
                .get_mut(symbol)
                .ok_or_else(|| Error::domain(format!("symbol {symbol} out of range")))?;
            *s = Operator::bell_xform(dim, delta.x, delta.y)?.apply(s, &[0])?;
        }
    }
    Ok(())
}

/// Executes `schedule` against `chain` in time order.
///
/// Stops quietly once the chain halts after a failed check. An event whose
/// inputs are missing raises [`Error::Ordering`].
pub fn run(schedule: &Schedule, chain: &mut ChainState, rng: &mut SimRng, attempt: u64) -> Result<Execution> {
    schedule.validate()?;
    let params = schedule.params;
    if *chain.params() != params {
        return Err(Error::domain("schedule and chain disagree on parameters"));
    }
    let mut order: Vec<&Event> = schedule.events.iter().collect();
    order.sort_by_key(|e| e.time_index);
    let mut produced: BTreeSet<Resource> = BTreeSet::new();
    let mut triples: BTreeMap<BlockId, TransmissionTriple> = BTreeMap::new();
    let mut out = Execution::default();
    let last = params.last_block();
    for e in order {
        if chain.is_halted() {
            break;
        }
        if let Some(missing) = e.requires(&params).into_iter().find(|r| !produced.contains(r)) {
            return Err(Error::ordering(format!("event at t={} needs {missing:?}, which does not exist yet", e.time_index)));
        }
        match &e.step {
            Step::Prepare => {}
            Step::Measure(b) => {
                chain.generate_keys(*b, rng)?;
            }
            Step::Send { from, to } => chain.send_public_key(*from, *to)?,
            Step::Receive { from, to } => {
                chain.receive_public_key(*from, *to, rng)?;
            }
            Step::ShareExclusive => chain.share_exclusive()?,
            Step::Publish => {
                chain.publish_global_identity()?;
            }
            Step::TransmitData => {
                let t = chain.receive_data(rng)?;
                triples.insert(last, t);
            }
            Step::Validate(b) => {
                let t = triples.remove(b).expect("triple resource present");
                if *b == last {
                    chain.validate_at_last(&t)?;
                } else {
                    chain.deliver(&t, BlockId(b.0 + 1), *b)?;
                }
                triples.insert(*b, t);
            }
            Step::Forward { from, to } => {
                let t = chain.outgoing_triple(&triples[from], *from)?;
                triples.insert(*to, t);
            }
            Step::Attack(a) => match a {
                AttackStep::InterceptBroadcast { from, to, symbols, basis } => {
                    let b = basis.vectors(params.dim, rng)?;
                    out.observations.extend(chain.intercept_broadcast(*from, *to, symbols, &b, rng)?);
                }
                AttackStep::InterceptLink { r, symbols, basis } => {
                    let b = basis.vectors(params.dim, rng)?;
                    out.observations.extend(chain.intercept_link(*r, symbols, &b, rng)?);
                }
                AttackStep::Tamper { to, target } => {
                    let t = triples.get_mut(to).expect("triple resource present");
                    tamper(t, target, params.dim)?;
                    chain.note_attack(format!("triple waiting at {to} altered: {target:?}"));
                }
                AttackStep::Forge { colluders, strategy, offset } => {
                    let data = chain.data().ok_or_else(|| Error::IncompleteInput("no block data".into()))?;
                    let forged = DitString::new(
                        params.dim,
                        data.symbols().iter().map(|&d| (d + offset) % params.dim).collect(),
                    )?;
                    let guess = match strategy {
                        CollusionStrategy::RandomKey => super::collusion::random_guess(&params, rng),
                        CollusionStrategy::Exhaustive => super::collusion::nth_guess(&params, attempt),
                    };
                    out.forgery = Some(forge_and_present(chain, colluders, &forged, &guess)?);
                    chain.note_attack(format!("colluders {colluders:?} present a forged triple"));
                }
            },
        }
        produced.extend(e.produces(&params));
    }
    Ok(out)
}

/// Moves one Bell measurement in front of an event that produces one of
/// its inputs, on top of a random valid shuffle of broadcast recipients.
/// The result must fail with an ordering error when run.
pub fn inject_out_of_order(params: ChainParams, rng: &mut SimRng) -> Schedule {
    let mut steps = honest_steps(&params);
    // Broadcast pairs for one sender can go in any order.
    let first_send = steps.iter().position(|s| matches!(s, Step::Send { .. })).expect("broadcasts");
    let end = steps.iter().position(|s| *s == Step::ShareExclusive).expect("share");
    let mut pairs: Vec<[Step; 2]> = steps[first_send..end].chunks(2).map(|c| [c[0].clone(), c[1].clone()]).collect();
    for i in (1..pairs.len()).rev() {
        let j = rng.below(i + 1);
        pairs.swap(i, j);
    }
    steps.splice(first_send..end, pairs.into_iter().flatten());

    let probe = Schedule::from_steps(params, steps.clone());
    let measures: Vec<usize> = steps.iter().enumerate().filter(|(_, s)| matches!(s, Step::Measure(_))).map(|(i, _)| i).collect();
    let victim = measures[rng.below(measures.len())];
    let needs = probe.events[victim].requires(&params);
    let producer = probe
        .events
        .iter()
        .position(|e| e.produces(&params).iter().any(|r| needs.contains(r)))
        .expect("every measurement has a producer");
    let step = steps.remove(victim);
    steps.insert(rng.below(producer + 1), step);
    Schedule::from_steps(params, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::run_honest;

    #[test]
    fn honest_schedule_matches_direct_run() {
        let params = ChainParams::new(4, 2, 1).unwrap();
        let data = DitString::new(2, vec![1]).unwrap();
        let direct = run_honest(params, data.clone(), &mut SimRng::from_seed(5)).unwrap();
        let mut chain = ChainState::build(params).unwrap();
        chain.set_block_data(data).unwrap();
        run(&honest_schedule(params), &mut chain, &mut SimRng::from_seed(5), 0).unwrap();
        assert_eq!(chain.transcript_hash(), direct.chain.transcript_hash());
    }

    #[test]
    fn structural_errors() {
        let params = ChainParams::new(3, 2, 1).unwrap();
        let mut s = honest_schedule(params);
        s.schedule(Event::new(0, Step::Publish));
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        // a cycle: two forwards feeding each other's validations
        let cyc = Schedule::from_steps(
            params,
            vec![
                Step::Validate(BlockId(2)),
                Step::Forward { from: BlockId(2), to: BlockId(3) },
                Step::Validate(BlockId(3)),
                Step::Forward { from: BlockId(3), to: BlockId(2) },
            ],
        );
        assert!(matches!(cyc.validate(), Err(Error::Config(m)) if m.iter().any(|x| x.contains("cycle"))));
    }

    #[test]
    fn injected_measurement_is_an_ordering_error() {
        let params = ChainParams::new(5, 3, 1).unwrap();
        let mut rng = SimRng::from_seed(9);
        for _ in 0..50 {
            let s = inject_out_of_order(params, &mut rng);
            let mut chain = ChainState::build(params).unwrap();
            chain.set_block_data(DitString::new(3, vec![2]).unwrap()).unwrap();
            assert!(matches!(run(&s, &mut chain, &mut rng, 0), Err(Error::Ordering(_))));
        }
    }
}
