use serde::{Deserialize, Serialize};

use super::{check_targets, split_offsets, StateRegister, C64, TOL};
use crate::rng::SimRng;
use crate::{Error, Result};

/// Result of one projective measurement: the index of the basis vector
/// that was found and its Born probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub index: usize,
    pub probability: f64,
}

/// Computational basis on `qudits` qudits of dimension `dim`.
pub fn computational_basis(dim: usize, qudits: usize) -> Vec<Vec<C64>> {
    let side = dim.pow(qudits as u32);
    (0..side)
        .map(|i| (0..side).map(|j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect())
        .collect()
}

fn check_basis(basis: &[Vec<C64>], side: usize) -> Result<()> {
    if basis.len() != side {
        return Err(Error::domain(format!("basis has {} vectors, expected {side}", basis.len())));
    }
    for (i, a) in basis.iter().enumerate() {
        if a.len() != side {
            return Err(Error::domain(format!("basis vector {i} has length {}", a.len())));
        }
        for (j, b) in basis.iter().enumerate().skip(i) {
            let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let expected = if i == j { 1.0 } else { 0.0 };
            if (ip - C64::new(expected, 0.0)).norm() > TOL {
                return Err(Error::domain(format!("basis is not orthonormal at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// Born probability of every basis vector on `targets`.
pub fn born_probabilities(state: &StateRegister, basis: &[Vec<C64>], targets: &[usize]) -> Result<Vec<f64>> {
    check_targets(state.num_qudits(), targets)?;
    check_basis(basis, state.dim().pow(targets.len() as u32))?;
    basis.iter().map(|b| state.projection_probability(b, targets)).collect()
}

/// Measures `targets` in the orthonormal `basis`, sampling with Born
/// probabilities and returning the renormalized collapsed register.
pub fn measure_projective(
    state: &StateRegister,
    basis: &[Vec<C64>],
    targets: &[usize],
    rng: &mut SimRng,
) -> Result<(Outcome, StateRegister)> {
    let probs = born_probabilities(state, basis, targets)?;
    let index = rng.weighted(&probs);
    let probability = probs[index].clamp(0.0, 1.0);

    let (_, reduced) = state.project_onto(&basis[index], targets)?;
    let (rest, sub) = split_offsets(state.dim(), state.num_qudits(), targets);
    let scale = 1.0 / probability.sqrt();
    let mut amps = vec![C64::new(0.0, 0.0); state.amplitudes().len()];
    for (&r, c) in rest.iter().zip(&reduced) {
        for (&s, b) in sub.iter().zip(&basis[index]) {
            amps[r + s] = b * c * scale;
        }
    }
    let collapsed = StateRegister::normalized(state.dim(), amps, state.tags().to_vec())?;
    Ok((Outcome { index, probability }, collapsed))
}

/// Single-qudit measurement in the computational basis.
pub fn measure_computational(state: &StateRegister, target: usize, rng: &mut SimRng) -> Result<(Outcome, StateRegister)> {
    measure_projective(state, &computational_basis(state.dim(), 1), &[target], rng)
}
