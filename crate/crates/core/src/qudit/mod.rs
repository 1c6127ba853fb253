//! Dense statevector machinery for N-dimensional qudits.
//!
//! Qudit 0 is the most significant digit of the amplitude index, so
//! `ket(2,0) ⊗ ket(2,1)` has its weight at index 1.

mod measure;
mod operator;
mod state;

pub use measure::{born_probabilities, computational_basis, measure_computational, measure_projective, Outcome};
pub use operator::{apply, Operator};
pub use state::{BlockId, QuditTag, StateRegister};

pub use num_complex::Complex64 as C64;

/// Tolerance for unitarity, norms and fidelities.
pub const TOL: f64 = 1e-9;

/// Default bound on register length (N^k).
pub const DEFAULT_AMPLITUDE_CAP: usize = 1 << 24;

/// The primitive N-th root of unity raised to `power`.
pub fn omega_pow(dim: usize, power: usize) -> C64 {
    let k = (power % dim) as f64;
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / dim as f64)
}

/// `|<a|b>|^2` for equal-length amplitude slices.
pub fn overlap_sqr(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>().norm_sqr()
}

/// Strides for splitting a k-qudit index into (rest, target) parts.
///
/// Returns `(rest_offsets, target_offsets)`; every amplitude index is
/// `rest_offsets[r] + target_offsets[s]` for exactly one pair `(r, s)`.
pub(crate) fn split_offsets(dim: usize, qudits: usize, targets: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let stride = |q: usize| dim.pow((qudits - 1 - q) as u32);
    let rest: Vec<usize> = (0..qudits).filter(|q| !targets.contains(q)).collect();
    let expand = |which: &[usize]| -> Vec<usize> {
        let mut offsets = vec![0usize];
        for &q in which {
            let s = stride(q);
            offsets = offsets.iter().flat_map(|&o| (0..dim).map(move |d| o + d * s)).collect();
        }
        offsets
    };
    (expand(&rest), expand(targets))
}

pub(crate) fn check_targets(qudits: usize, targets: &[usize]) -> crate::Result<()> {
    if targets.is_empty() {
        return Err(crate::Error::domain("no target qudits"));
    }
    for (i, &t) in targets.iter().enumerate() {
        if t >= qudits {
            return Err(crate::Error::domain(format!("target {t} out of range for {qudits} qudits")));
        }
        if targets[..i].contains(&t) {
            return Err(crate::Error::domain(format!("duplicate target {t}")));
        }
    }
    Ok(())
}
