//! Stateless pieces of the protocol: data encoding, identity states and
//! the two validation checks.

use super::types::{DitString, Identity, TransmissionTriple, Verdict};
use crate::entangle::BellLabel;
use crate::qudit::{BlockId, Operator, QuditTag, StateRegister, TOL};
use crate::{Error, Result};

/// Basis tag recorded on every identity built here.
pub const IDENTITY_BASIS: &str = "cubic-phase-fourier";

/// `|d_1>|d_2>...|d_m>` as one m-qudit register.
pub fn encode_block_data(data: &DitString, cap: usize) -> Result<StateRegister> {
    let dim = data.dim();
    let mut kets = data.symbols().iter().map(|&d| StateRegister::ket(dim, d));
    let mut acc = kets.next().expect("dit strings are never empty")?;
    for k in kets {
        acc = acc.tensor_with_cap(&k?, cap)?;
    }
    Ok(acc)
}

/// Identity state `|xi_d> = M|d>` of one symbol.
pub fn identity_state(dim: usize, d: usize) -> Result<StateRegister> {
    Operator::identity_basis(dim)?.apply(&StateRegister::ket(dim, d)?, &[0])
}

/// Per-symbol identity states of the data owner, before any key is applied.
pub fn make_identity(data: &DitString) -> Result<Identity> {
    let states = data.symbols().iter().map(|&d| identity_state(data.dim(), d)).collect::<Result<_>>()?;
    Ok(Identity { owner: BlockId(1), timestamp: 0, basis: IDENTITY_BASIS.into(), states })
}

/// Applies `U†_(k.x, k.y)` to every symbol state, one key per symbol.
pub fn apply_inverse_keys(states: &[StateRegister], keys: &[BellLabel]) -> Result<Vec<StateRegister>> {
    if states.len() != keys.len() {
        return Err(Error::domain(format!("{} states but {} keys", states.len(), keys.len())));
    }
    states
        .iter()
        .zip(keys)
        .map(|(s, k)| Operator::bell_xform(s.dim(), k.x, k.y)?.adjoint().apply(s, &[0]))
        .collect()
}

/// Applies `U_(k.x, k.y)` to every symbol state.
pub fn apply_keys(states: &[StateRegister], keys: &[BellLabel]) -> Result<Vec<StateRegister>> {
    if states.len() != keys.len() {
        return Err(Error::domain(format!("{} states but {} keys", states.len(), keys.len())));
    }
    states.iter().zip(keys).map(|(s, k)| Operator::bell_xform(s.dim(), k.x, k.y)?.apply(s, &[0])).collect()
}

/// Global identity states `U†_(key_i) M|data_i>`.
pub fn global_identity_states(data: &DitString, key: &[BellLabel]) -> Result<Vec<StateRegister>> {
    apply_inverse_keys(&make_identity(data)?.states, key)
}

/// Componentwise mod-N sum of several per-symbol key lists.
pub fn key_sums<'a>(dim: usize, m: usize, keys: impl IntoIterator<Item = &'a [BellLabel]>) -> Result<Vec<BellLabel>> {
    let mut acc = vec![BellLabel::ZERO; m];
    for k in keys {
        if k.len() != m {
            return Err(Error::domain(format!("key of length {} for {m} symbols", k.len())));
        }
        for (a, &b) in acc.iter_mut().zip(k) {
            *a = a.add(b, dim);
        }
    }
    Ok(acc)
}

/// Identity a validator derives from the published one: `U†_(sums_i)`
/// applied per symbol.
pub fn reconstruct_identity(published: &Identity, sums: &[BellLabel], at: BlockId, timestamp: u64) -> Result<Identity> {
    let states = apply_inverse_keys(&published.states, sums)?
        .into_iter()
        .map(|s| s.with_tags(&[QuditTag::new(0, at)]))
        .collect::<Result<_>>()?;
    Ok(Identity { owner: at, timestamp, basis: published.basis.clone(), states })
}

/// Data-integrity check: recompute the global identity from the triple's
/// data and sender key and compare with the published one, per symbol.
///
/// Malformed triples (wrong length, keys out of range) fail every symbol.
pub fn validate_1(triple: &TransmissionTriple, published: &Identity) -> Vec<Verdict> {
    let m = published.len();
    let fail = || vec![Verdict::Fail; m];
    let dim = match published.states.first() {
        Some(s) => s.dim(),
        None => return Vec::new(),
    };
    if triple.data.len() != m || triple.sender_public_key.len() != m || triple.data.dim() != dim {
        return fail();
    }
    let Ok(recomputed) = global_identity_states(&triple.data, &triple.sender_public_key) else {
        return fail();
    };
    recomputed
        .iter()
        .zip(&published.states)
        .map(|(a, b)| Verdict::from_bool(a.fidelity(b).map(|f| f >= 1.0 - TOL).unwrap_or(false)))
        .collect()
}

/// Identity-authenticity check, per symbol: equality of `reconstructed`
/// and `reference` must hold exactly when the intermediate key sum is zero.
pub fn validate_2(reconstructed: &Identity, reference: &Identity, sums: &[BellLabel]) -> Vec<Verdict> {
    let m = sums.len();
    if reconstructed.len() != m || reference.len() != m {
        return vec![Verdict::Fail; m];
    }
    reconstructed
        .states
        .iter()
        .zip(&reference.states)
        .zip(sums)
        .map(|((a, b), s)| {
            let equal = a.fidelity(b).map(|f| f >= 1.0 - TOL).unwrap_or(false);
            Verdict::from_bool(s.is_zero() == equal)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qudit::C64;

    #[test]
    fn encoding_is_a_product_of_kets() {
        let d = DitString::new(3, vec![2, 0, 1]).unwrap();
        let s = encode_block_data(&d, 1 << 10).unwrap();
        assert_eq!(s.num_qudits(), 3);
        assert!((s.amplitudes()[2 * 9 + 1].norm() - 1.0).abs() < 1e-12);
        assert!(matches!(encode_block_data(&DitString::new(2, vec![0; 11]).unwrap(), 1024), Err(Error::Resource { .. })));
    }

    #[test]
    fn zero_key_global_identity_is_the_identity() {
        let d = DitString::new(5, vec![4, 1]).unwrap();
        let g = global_identity_states(&d, &[BellLabel::ZERO; 2]).unwrap();
        for (a, b) in g.iter().zip(&make_identity(&d).unwrap().states) {
            assert!(a.same_ray(b));
        }
    }

    #[test]
    fn validate_2_branches() {
        let d = DitString::new(2, vec![0]).unwrap();
        let id = make_identity(&d).unwrap();
        assert_eq!(validate_2(&id, &id, &[BellLabel::ZERO]), vec![Verdict::Pass]);
        assert_eq!(validate_2(&id, &id, &[BellLabel { x: 1, y: 0 }]), vec![Verdict::Fail]);
        let moved = reconstruct_identity(&id, &[BellLabel { x: 1, y: 0 }], BlockId(2), 1).unwrap();
        assert_eq!(validate_2(&moved, &id, &[BellLabel { x: 1, y: 0 }]), vec![Verdict::Pass]);
        assert_eq!(validate_2(&moved, &id, &[BellLabel::ZERO]), vec![Verdict::Fail]);
    }

    #[test]
    fn validate_1_rejects_malformed_triples() {
        let d = DitString::new(3, vec![1, 2]).unwrap();
        let key = vec![BellLabel { x: 1, y: 2 }, BellLabel::ZERO];
        let published = Identity {
            owner: BlockId(1),
            timestamp: 3,
            basis: IDENTITY_BASIS.into(),
            states: global_identity_states(&d, &key).unwrap(),
        };
        let good = TransmissionTriple { data: d.clone(), sender_public_key: key.clone(), forwarded_identity: published.clone() };
        assert_eq!(validate_1(&good, &published), vec![Verdict::Pass; 2]);
        let short = TransmissionTriple { sender_public_key: key[..1].to_vec(), ..good.clone() };
        assert_eq!(validate_1(&short, &published), vec![Verdict::Fail; 2]);
        let wild = TransmissionTriple { sender_public_key: vec![BellLabel { x: 7, y: 0 }; 2], ..good };
        assert_eq!(validate_1(&wild, &published), vec![Verdict::Fail; 2]);
    }

    #[test]
    fn two_level_identity() {
        // M|0> at N = 2 is (|0> + e^{i pi/4}|1>)/sqrt2
        let s = identity_state(2, 0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let expected = StateRegister::new(2, vec![C64::new(h, 0.0), C64::from_polar(h, std::f64::consts::FRAC_PI_4)], vec![QuditTag::default()]).unwrap();
        assert!(s.same_ray(&expected));
    }
}
