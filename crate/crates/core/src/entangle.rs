//! High-dimensional Bell and cat states, time-bin encoding, Bell-state
//! measurement, entanglement swapping and superdense coding.

use serde::{Deserialize, Serialize};

use crate::qudit::{measure_projective, omega_pow, BlockId, Operator, QuditTag, StateRegister, C64, TOL};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Bell-basis label: `x` is the phase index, `y` the shift index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BellLabel {
    pub x: usize,
    pub y: usize,
}

impl BellLabel {
    pub const ZERO: BellLabel = BellLabel { x: 0, y: 0 };

    pub fn new(dim: usize, x: usize, y: usize) -> Result<Self> {
        check_label(dim, x, y)?;
        Ok(BellLabel { x, y })
    }

    /// Position of this label in [`bell_basis`].
    pub fn index(self, dim: usize) -> usize {
        self.x * dim + self.y
    }

    pub fn from_index(dim: usize, index: usize) -> Self {
        BellLabel { x: index / dim, y: index % dim }
    }

    /// Componentwise sum mod N.
    pub fn add(self, other: BellLabel, dim: usize) -> BellLabel {
        BellLabel { x: (self.x + other.x) % dim, y: (self.y + other.y) % dim }
    }

    pub fn is_zero(self) -> bool {
        self == Self::ZERO
    }

    pub fn all(dim: usize) -> impl Iterator<Item = BellLabel> {
        (0..dim * dim).map(move |i| BellLabel::from_index(dim, i))
    }
}

impl std::fmt::Display for BellLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::domain(format!("qudit dimension {dim} < 2")));
    }
    Ok(())
}

fn check_label(dim: usize, x: usize, y: usize) -> Result<()> {
    check_dim(dim)?;
    if x >= dim || y >= dim {
        return Err(Error::domain(format!("label ({x},{y}) out of range for dimension {dim}")));
    }
    Ok(())
}

fn bell_vector(dim: usize, x: usize, y: usize) -> Vec<C64> {
    let norm = 1.0 / (dim as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        amps[j * dim + (j + y) % dim] = omega_pow(dim, j * x) * norm;
    }
    amps
}

/// `|psi(x,y)> = N^{-1/2} sum_j w^{jx} |j>|j+y mod N>`.
pub fn bell_state(dim: usize, x: usize, y: usize) -> Result<StateRegister> {
    check_label(dim, x, y)?;
    StateRegister::new(dim, bell_vector(dim, x, y), vec![QuditTag::default(); 2])
}

/// All N² Bell states, ordered by [`BellLabel::index`].
pub fn bell_basis(dim: usize) -> Result<Vec<StateRegister>> {
    check_dim(dim)?;
    BellLabel::all(dim).map(|l| bell_state(dim, l.x, l.y)).collect()
}

fn bell_basis_vectors(dim: usize) -> Vec<Vec<C64>> {
    BellLabel::all(dim).map(|l| bell_vector(dim, l.x, l.y)).collect()
}

/// n-party cat state `N^{-1/2} sum_j w^{j x_1} |j, j+x_2, ..., j+x_n>`.
pub fn cat_state(dim: usize, parties: usize, xs: &[usize]) -> Result<StateRegister> {
    check_dim(dim)?;
    if parties < 2 {
        return Err(Error::domain("a cat state needs at least two parties"));
    }
    if xs.len() != parties {
        return Err(Error::domain(format!("{} labels for {parties} parties", xs.len())));
    }
    if let Some(bad) = xs.iter().find(|&&x| x >= dim) {
        return Err(Error::domain(format!("label {bad} out of range for dimension {dim}")));
    }
    let side = (dim as u128).pow(parties as u32);
    if side > crate::qudit::DEFAULT_AMPLITUDE_CAP as u128 {
        return Err(Error::Resource { needed: side, cap: crate::qudit::DEFAULT_AMPLITUDE_CAP });
    }
    let norm = 1.0 / (dim as f64).sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); side as usize];
    for j in 0..dim {
        let mut index = j;
        for &x in &xs[1..] {
            index = index * dim + (j + x) % dim;
        }
        amps[index] = omega_pow(dim, j * xs[0]) * norm;
    }
    StateRegister::new(dim, amps, vec![QuditTag::default(); parties])
}

/// A Bell pair whose two qudits sit in different logical time bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBinPair {
    pub state: StateRegister,
    pub early_bin: u32,
    pub late_bin: u32,
    pub record: (usize, usize),
}

/// Encodes the record `(b1, b2)` as
/// `N^{-1/2} sum_j w^{j b2} |j>_early |b1 + j mod N>_late`.
///
/// This is `bell_state(N, b2, b1)` with time-bin tags attached.
pub fn timebin_encode(dim: usize, b1: usize, b2: usize, t_early: u32, t_late: u32) -> Result<TimeBinPair> {
    timebin_encode_owned(dim, b1, b2, (t_early, BlockId(0)), (t_late, BlockId(0)))
}

/// [`timebin_encode`] with explicit owners for the two qudits.
pub fn timebin_encode_owned(
    dim: usize,
    b1: usize,
    b2: usize,
    early: (u32, BlockId),
    late: (u32, BlockId),
) -> Result<TimeBinPair> {
    check_label(dim, b1, b2)?;
    if early.0 >= late.0 {
        return Err(Error::domain(format!("early bin {} is not before late bin {}", early.0, late.0)));
    }
    let state = bell_state(dim, b2, b1)?.with_tags(&[QuditTag::new(early.0, early.1), QuditTag::new(late.0, late.1)])?;
    Ok(TimeBinPair { state, early_bin: early.0, late_bin: late.0, record: (b1, b2) })
}

/// High-dimensional Bell-state measurement on two qudits.
///
/// Both targets are marked spent in the returned register; the collapsed
/// amplitudes stay in place.
pub fn hdbm(state: &StateRegister, targets: [usize; 2], rng: &mut SimRng) -> Result<(BellLabel, StateRegister)> {
    if targets[0] == targets[1] {
        return Err(Error::domain("Bell measurement needs two distinct qudits"));
    }
    for &t in &targets {
        match state.tags().get(t) {
            None => return Err(Error::domain(format!("qudit {t} out of range"))),
            Some(tag) if tag.spent => return Err(Error::domain(format!("qudit {t} was already measured"))),
            Some(_) => {}
        }
    }
    let dim = state.dim();
    let (outcome, mut post) = measure_projective(state, &bell_basis_vectors(dim), &targets, rng)?;
    post.mark_spent(&targets);
    Ok((BellLabel::from_index(dim, outcome.index), post))
}

/// Label of the pair left on `(A, D)` after a Bell measurement with
/// `outcome` on `(B, C)`, where `(A, B)` held `a` and `(C, D)` held `b`.
pub fn swap_residual(dim: usize, a: BellLabel, b: BellLabel, outcome: BellLabel) -> BellLabel {
    BellLabel { x: (a.x + b.x + dim - outcome.x) % dim, y: (a.y + b.y + outcome.y) % dim }
}

#[derive(Debug, Clone)]
pub struct SwapResult {
    /// Outcome of the Bell measurement on the two inner qudits.
    pub outcome: BellLabel,
    /// Bell label now shared by the two outer qudits.
    pub residual: BellLabel,
    pub state: StateRegister,
}

/// Entanglement swapping: Bell-measures `pair_a.1` and `pair_b.0`,
/// leaving `pair_a.0` and `pair_b.1` in Bell state `residual`.
pub fn entanglement_swap(
    register: &StateRegister,
    pair_a: (usize, usize),
    label_a: BellLabel,
    pair_b: (usize, usize),
    label_b: BellLabel,
    rng: &mut SimRng,
) -> Result<SwapResult> {
    let dim = register.dim();
    if register.num_qudits() < 4 {
        return Err(Error::domain("entanglement swapping needs at least four qudits"));
    }
    for (pair, label) in [(pair_a, label_a), (pair_b, label_b)] {
        check_label(dim, label.x, label.y)?;
        let p = register.projection_probability(&bell_vector(dim, label.x, label.y), &[pair.0, pair.1])?;
        if p < 1.0 - TOL {
            return Err(Error::domain(format!(
                "qudits ({}, {}) are not in Bell state {label} (fidelity {p})",
                pair.0, pair.1
            )));
        }
    }
    let (outcome, state) = hdbm(register, [pair_a.1, pair_b.0], rng)?;
    let residual = swap_residual(dim, label_a, label_b, outcome);
    let p = state.projection_probability(&bell_vector(dim, residual.x, residual.y), &[pair_a.0, pair_b.1])?;
    debug_assert!(p > 1.0 - 1e-6, "residual pair not in predicted Bell state");
    Ok(SwapResult { outcome, residual, state })
}

/// Removes two qudits that a Bell measurement left in state `label`.
pub fn discard_bell_pair(state: &StateRegister, targets: [usize; 2], label: BellLabel) -> Result<StateRegister> {
    state.discard(&targets, &bell_vector(state.dim(), label.x, label.y))
}

/// Encodes `msg` on the sender's half (qudit 1) of a shared `|psi(0,0)>`.
pub fn superdense_encode(shared: &StateRegister, msg: BellLabel) -> Result<StateRegister> {
    let dim = shared.dim();
    if shared.num_qudits() != 2 {
        return Err(Error::domain("superdense coding needs a two-qudit register"));
    }
    check_label(dim, msg.x, msg.y)?;
    let f = shared.projection_probability(&bell_vector(dim, 0, 0), &[0, 1])?;
    if f < 1.0 - TOL {
        return Err(Error::domain(format!("shared pair is not |psi(0,0)> (fidelity {f})")));
    }
    Operator::bell_xform(dim, msg.x, msg.y)?.apply(shared, &[1])
}

/// Bell-measures a two-qudit register and returns the label.
pub fn superdense_decode(state: &StateRegister, rng: &mut SimRng) -> Result<BellLabel> {
    if state.num_qudits() != 2 {
        return Err(Error::domain("superdense decoding needs a two-qudit register"));
    }
    Ok(hdbm(state, [0, 1], rng)?.0)
}
