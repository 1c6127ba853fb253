use serde::{Deserialize, Serialize};

use super::{check_targets, overlap_sqr, split_offsets, C64, DEFAULT_AMPLITUDE_CAP, TOL};
use crate::{Error, Result};

/// Identifier of a block in the chain. Blocks are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlockId(pub u32);

impl std::fmt::Display for BlockId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "B{}", self.0)
    }
}

/// Logical placement of one qudit: which time bin it lives in and which
/// block holds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuditTag {
    pub time_bin: u32,
    pub owner: BlockId,
    /// Set once a destructive measurement has consumed the qudit.
    #[serde(default)]
    pub spent: bool,
}

impl QuditTag {
    pub fn new(time_bin: u32, owner: BlockId) -> Self {
        QuditTag { time_bin, owner, spent: false }
    }
}

impl Default for QuditTag {
    fn default() -> Self {
        QuditTag::new(0, BlockId(0))
    }
}

/// Normalized pure state of k qudits of dimension N.
#[derive(Debug, Clone, PartialEq)]
pub struct StateRegister {
    dim: usize,
    amps: Vec<C64>,
    tags: Vec<QuditTag>,
}

fn checked_len(dim: usize, qudits: usize, cap: usize) -> Result<usize> {
    let needed = (dim as u128).checked_pow(qudits as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::Resource { needed, cap });
    }
    Ok(needed as usize)
}

impl StateRegister {
    /// Builds a register from raw amplitudes, checking shape and norm.
    pub fn new(dim: usize, amps: Vec<C64>, tags: Vec<QuditTag>) -> Result<Self> {
        Self::with_cap(dim, amps, tags, DEFAULT_AMPLITUDE_CAP)
    }

    pub fn with_cap(dim: usize, amps: Vec<C64>, tags: Vec<QuditTag>, cap: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("qudit dimension {dim} < 2")));
        }
        if tags.is_empty() {
            return Err(Error::domain("register needs at least one qudit"));
        }
        let len = checked_len(dim, tags.len(), cap)?;
        if amps.len() != len {
            return Err(Error::domain(format!(
                "{} amplitudes for {} qudits of dimension {dim}",
                amps.len(),
                tags.len()
            )));
        }
        let reg = StateRegister { dim, amps, tags };
        let norm = reg.norm_sqr();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::domain(format!("state norm {norm} is not 1")));
        }
        Ok(reg)
    }

    /// Normalizes `amps` first; fails on the zero vector.
    pub fn normalized(dim: usize, mut amps: Vec<C64>, tags: Vec<QuditTag>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::domain("cannot normalize the zero vector"));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Self::new(dim, amps, tags)
    }

    /// Computational basis state |j> of one qudit.
    pub fn ket(dim: usize, j: usize) -> Result<Self> {
        Self::ket_tagged(dim, j, QuditTag::default())
    }

    pub fn ket_tagged(dim: usize, j: usize, tag: QuditTag) -> Result<Self> {
        if dim < 2 {
            return Err(Error::domain(format!("qudit dimension {dim} < 2")));
        }
        if j >= dim {
            return Err(Error::domain(format!("basis index {j} out of range for dimension {dim}")));
        }
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[j] = C64::new(1.0, 0.0);
        Ok(StateRegister { dim, amps, tags: vec![tag] })
    }

    /// Kronecker product `a ⊗ b`; tags are `a`'s then `b`'s.
    pub fn tensor(&self, other: &StateRegister) -> Result<Self> {
        self.tensor_with_cap(other, DEFAULT_AMPLITUDE_CAP)
    }

    pub fn tensor_with_cap(&self, other: &StateRegister, cap: usize) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::domain(format!("dimension mismatch: {} vs {}", self.dim, other.dim)));
        }
        checked_len(self.dim, self.tags.len() + other.tags.len(), cap)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        let tags = self.tags.iter().chain(&other.tags).copied().collect();
        Ok(StateRegister { dim: self.dim, amps, tags })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qudits(&self) -> usize {
        self.tags.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn tags(&self) -> &[QuditTag] {
        &self.tags
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateRegister) -> Result<C64> {
        self.same_shape(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<self|other>|^2`; insensitive to global phase.
    pub fn fidelity(&self, other: &StateRegister) -> Result<f64> {
        self.same_shape(other)?;
        Ok(overlap_sqr(&self.amps, &other.amps))
    }

    /// Equality up to global phase at the crate tolerance.
    pub fn same_ray(&self, other: &StateRegister) -> bool {
        self.fidelity(other).map(|f| f >= 1.0 - TOL).unwrap_or(false)
    }

    fn same_shape(&self, other: &StateRegister) -> Result<()> {
        if self.dim != other.dim || self.amps.len() != other.amps.len() {
            return Err(Error::domain("registers differ in shape"));
        }
        Ok(())
    }

    pub fn set_tag(&mut self, qudit: usize, tag: QuditTag) -> Result<()> {
        let slot = self
            .tags
            .get_mut(qudit)
            .ok_or_else(|| Error::domain(format!("qudit {qudit} out of range")))?;
        *slot = tag;
        Ok(())
    }

    pub fn with_tags(mut self, tags: &[QuditTag]) -> Result<Self> {
        if tags.len() != self.tags.len() {
            return Err(Error::domain("tag count does not match qudit count"));
        }
        self.tags.copy_from_slice(tags);
        Ok(self)
    }

    pub(crate) fn mark_spent(&mut self, targets: &[usize]) {
        for &t in targets {
            self.tags[t].spent = true;
        }
    }

    pub(crate) fn from_parts_unchecked(dim: usize, amps: Vec<C64>, tags: Vec<QuditTag>) -> Self {
        StateRegister { dim, amps, tags }
    }

    /// Probability that `targets` are found in the pure state `vector`
    /// (length N^|targets|, normalized).
    pub fn projection_probability(&self, vector: &[C64], targets: &[usize]) -> Result<f64> {
        let (prob, _) = self.project_onto(vector, targets)?;
        Ok(prob)
    }

    /// Partial inner product: returns the Born probability of `vector` on
    /// `targets` and the unnormalized amplitudes left on the other qudits.
    pub(crate) fn project_onto(&self, vector: &[C64], targets: &[usize]) -> Result<(f64, Vec<C64>)> {
        check_targets(self.num_qudits(), targets)?;
        let sub_len = self.dim.pow(targets.len() as u32);
        if vector.len() != sub_len {
            return Err(Error::domain(format!("projector of length {} on {} targets", vector.len(), targets.len())));
        }
        let (rest, sub) = split_offsets(self.dim, self.num_qudits(), targets);
        let reduced: Vec<C64> = rest
            .iter()
            .map(|&r| sub.iter().zip(vector).map(|(&s, b)| b.conj() * self.amps[r + s]).sum())
            .collect();
        let prob = reduced.iter().map(|c| c.norm_sqr()).sum();
        Ok((prob, reduced))
    }

    /// Removes `targets` from the register, given that they are in the
    /// product state `vector`. Fails when the register is not of that form.
    pub fn discard(&self, targets: &[usize], vector: &[C64]) -> Result<StateRegister> {
        if targets.len() >= self.num_qudits() {
            return Err(Error::domain("cannot discard every qudit of a register"));
        }
        let (prob, reduced) = self.project_onto(vector, targets)?;
        if prob < 1.0 - TOL {
            return Err(Error::domain(format!(
                "discarded qudits are entangled with the rest (weight {prob})"
            )));
        }
        let tags = (0..self.num_qudits()).filter(|q| !targets.contains(q)).map(|q| self.tags[q]).collect();
        StateRegister::normalized(self.dim, reduced, tags)
    }

    /// Purity `tr(rho^2)` of the reduced state on `keep`.
    pub fn reduced_purity(&self, keep: &[usize]) -> Result<f64> {
        check_targets(self.num_qudits(), keep)?;
        let (rest, sub) = split_offsets(self.dim, self.num_qudits(), keep);
        let mut purity = 0.0;
        for &s in &sub {
            for &t in &sub {
                let rho: C64 = rest.iter().map(|&r| self.amps[r + s] * self.amps[r + t].conj()).sum();
                purity += rho.norm_sqr();
            }
        }
        Ok(purity)
    }

    /// Canonical serialization used in transcripts.
    pub fn to_canonical(&self) -> CanonicalRegister {
        CanonicalRegister {
            qudit_dim: self.dim,
            qudits: self.num_qudits(),
            tags: self.tags.clone(),
            amplitudes: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_canonical(c: &CanonicalRegister) -> Result<Self> {
        if c.tags.len() != c.qudits {
            return Err(Error::domain("tag list length differs from qudit count"));
        }
        let amps = c.amplitudes.iter().map(|[re, im]| C64::new(*re, *im)).collect();
        Self::new(c.qudit_dim, amps, c.tags.clone())
    }
}

/// Wire form of a [`StateRegister`]: N, k, tags, then `(re, im)` pairs in
/// row-major index order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalRegister {
    pub qudit_dim: usize,
    pub qudits: usize,
    pub tags: Vec<QuditTag>,
    pub amplitudes: Vec<[f64; 2]>,
}

impl Serialize for StateRegister {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_canonical().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateRegister {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let c = CanonicalRegister::deserialize(deserializer)?;
        StateRegister::from_canonical(&c).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amps(reg: &StateRegister) -> Vec<(f64, f64)> {
        reg.amplitudes().iter().map(|a| (a.re, a.im)).collect()
    }

    #[test]
    fn kets() {
        assert_eq!(amps(&StateRegister::ket(2, 0).unwrap()), vec![(1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(amps(&StateRegister::ket(3, 2).unwrap()), vec![(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        assert!(matches!(StateRegister::ket(5, 5), Err(Error::Domain(_))));
        assert!(matches!(StateRegister::ket(1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn tensor_orders_qudits() {
        let s = StateRegister::ket(2, 0).unwrap().tensor(&StateRegister::ket(2, 1).unwrap()).unwrap();
        assert_eq!(amps(&s), vec![(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
        let three = s.tensor(&StateRegister::ket(2, 1).unwrap()).unwrap();
        assert_eq!(three.amplitudes().len(), 8);
        let t = StateRegister::ket(3, 0)
            .unwrap()
            .tensor(&StateRegister::ket(3, 1).unwrap())
            .unwrap()
            .tensor(&StateRegister::ket(3, 2).unwrap())
            .unwrap();
        assert_eq!(t.amplitudes().len(), 27);
        assert_eq!(t.num_qudits(), 3);
    }

    #[test]
    fn tensor_rejects_mixed_dims() {
        let a = StateRegister::ket(2, 0).unwrap();
        let b = StateRegister::ket(3, 0).unwrap();
        assert!(matches!(a.tensor(&b), Err(Error::Domain(_))));
    }

    #[test]
    fn cap_is_enforced_before_allocation() {
        let a = StateRegister::ket(4, 0).unwrap();
        let b = a.tensor(&a).unwrap();
        assert!(matches!(b.tensor_with_cap(&a, 32), Err(Error::Resource { needed: 64, cap: 32 })));
    }

    #[test]
    fn new_checks_norm_and_length() {
        let half = C64::new(0.5, 0.0);
        assert!(StateRegister::new(2, vec![half; 2], vec![QuditTag::default()]).is_err());
        assert!(StateRegister::new(2, vec![half; 4], vec![QuditTag::default()]).is_err());
        assert!(StateRegister::new(2, vec![half; 4], vec![QuditTag::default(); 2]).is_ok());
    }

    #[test]
    fn discard_requires_product() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateRegister::new(
            2,
            vec![C64::new(h, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(h, 0.0)],
            vec![QuditTag::default(); 2],
        )
        .unwrap();
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        assert!(bell.discard(&[0], &zero).is_err());

        let prod = StateRegister::ket(2, 1).unwrap().tensor(&StateRegister::ket(2, 0).unwrap()).unwrap();
        let rest = prod.discard(&[1], &zero).unwrap();
        assert!(rest.same_ray(&StateRegister::ket(2, 1).unwrap()));
    }

    #[test]
    fn canonical_roundtrip() {
        let s = StateRegister::ket(3, 1).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.starts_with("{\"qudit_dim\":3,\"qudits\":1,\"tags\""));
        let back: StateRegister = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
