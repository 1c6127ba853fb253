use hdqchain::qudit::*;
use hdqchain::rng::SimRng;
use hdqchain::Error;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense matrix product written out longhand, independent of `compose`.
fn matmul(a: &Operator, b: &Operator) -> Vec<C64> {
    let n = a.side();
    let mut out = vec![c(0., 0.); n * n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i * n + j] += a.entry(i, k) * b.entry(k, j);
            }
        }
    }
    out
}

fn random_state(dim: usize, qudits: usize, seed: u64) -> StateRegister {
    let mut rng = SimRng::from_seed(seed);
    let side = dim.pow(qudits as u32);
    let amps = (0..side).map(|_| c(rng.unit() - 0.5, rng.unit() - 0.5)).collect();
    StateRegister::normalized(dim, amps, vec![QuditTag::default(); qudits]).unwrap()
}

proptest! {
    #[test]
    fn weyl_operators_are_unitary(dim in 2usize..=9, x in 0usize..9, y in 0usize..9) {
        let op = Operator::bell_xform(dim, x % dim, y % dim).unwrap();
        prop_assert!(op.is_unitary(TOL));
        prop_assert!(op.compose(&op.adjoint()).unwrap().approx_eq(&Operator::identity(dim, 1).unwrap(), TOL));
    }

    #[test]
    fn clock_and_shift_commute_up_to_omega(dim in 2usize..=11) {
        // Z X = w X Z
        let x = Operator::shift(dim).unwrap();
        let z = Operator::clock(dim).unwrap();
        let zx = matmul(&z, &x);
        let xz = matmul(&x, &z);
        let w = omega_pow(dim, 1);
        for (l, r) in zx.iter().zip(&xz) {
            prop_assert!((l - w * r).norm() < TOL);
        }
    }

    #[test]
    fn generators_have_order_n(dim in 2usize..=9) {
        let id = Operator::identity(dim, 1).unwrap();
        prop_assert!(Operator::shift(dim).unwrap().pow(dim as u32).approx_eq(&id, TOL));
        prop_assert!(Operator::clock(dim).unwrap().pow(dim as u32).approx_eq(&id, TOL));
        prop_assert!(Operator::fourier(dim).unwrap().pow(4).approx_eq(&id, TOL));
    }

    #[test]
    fn unitaries_preserve_norm(dim in 2usize..=5, qudits in 1usize..=3, target in 0usize..3, seed: u64, x in 0usize..5, y in 0usize..5) {
        let s = random_state(dim, qudits, seed);
        let t = target % qudits;
        for op in [Operator::fourier(dim).unwrap(), Operator::bell_xform(dim, x % dim, y % dim).unwrap(), Operator::identity_basis(dim).unwrap()] {
            let out = op.apply(&s, &[t]).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < TOL);
            let back = op.adjoint().apply(&out, &[t]).unwrap();
            prop_assert!(back.fidelity(&s).unwrap() > 1.0 - TOL);
        }
    }

    #[test]
    fn applying_on_one_qudit_matches_kron(dim in 2usize..=4, seed: u64) {
        // F on qudit 1 of two equals (I kron F) built by hand
        let s = random_state(dim, 2, seed);
        let f = Operator::fourier(dim).unwrap();
        let out = f.apply(&s, &[1]).unwrap();
        let a = s.amplitudes();
        for i in 0..dim {
            for j in 0..dim {
                let want: C64 = (0..dim).map(|k| f.entry(j, k) * a[i * dim + k]).sum();
                prop_assert!((out.amplitudes()[i * dim + j] - want).norm() < TOL);
            }
        }
    }

    #[test]
    fn measurement_is_deterministic_under_seed(dim in 2usize..=5, seed: u64, rseed: u64) {
        let s = random_state(dim, 2, seed);
        let a = measure_computational(&s, 1, &mut SimRng::from_seed(rseed)).unwrap();
        let b = measure_computational(&s, 1, &mut SimRng::from_seed(rseed)).unwrap();
        prop_assert_eq!(a.0, b.0);
        prop_assert_eq!(a.1, b.1);
    }

    #[test]
    fn collapse_is_normalized_and_consistent(dim in 2usize..=4, seed: u64, rseed: u64) {
        let s = random_state(dim, 2, seed);
        let (o, post) = measure_computational(&s, 0, &mut SimRng::from_seed(rseed)).unwrap();
        prop_assert!((post.norm_sqr() - 1.0).abs() < TOL);
        prop_assert!(o.probability > 0.0);
        // measuring again gives the same digit with certainty
        let (o2, _) = measure_computational(&post, 0, &mut SimRng::from_seed(rseed ^ 1)).unwrap();
        prop_assert_eq!(o.index, o2.index);
        prop_assert!((o2.probability - 1.0).abs() < 1e-9);
    }
}

#[test]
fn born_frequencies_match_probabilities() {
    let amps = vec![c(0.6, 0.), c(0., 0.), c(0., 0.8)];
    let s = StateRegister::new(3, amps, vec![QuditTag::default()]).unwrap();
    let mut rng = SimRng::from_seed(5);
    let mut counts = [0u32; 3];
    let n = 20_000;
    for _ in 0..n {
        counts[measure_computational(&s, 0, &mut rng).unwrap().0.index] += 1;
    }
    assert_eq!(counts[1], 0);
    let p0 = counts[0] as f64 / n as f64;
    // 0.36 within 4 sigma
    assert!((p0 - 0.36).abs() < 4.0 * (0.36f64 * 0.64 / n as f64).sqrt(), "{p0}");
}

#[test]
fn fourier_matches_textbook_n2() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let f = Operator::fourier(2).unwrap();
    let want = [h, h, h, -h];
    for (i, w) in want.iter().enumerate() {
        assert!((f.matrix()[i] - c(*w, 0.)).norm() < 1e-12);
    }
}

#[test]
fn identity_basis_is_unbiased_to_the_computational_basis() {
    for dim in 2..=12 {
        let m = Operator::identity_basis(dim).unwrap();
        for col in m.columns() {
            for a in &col {
                assert!((a.norm_sqr() - 1.0 / dim as f64).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn identity_basis_columns_are_no_weyl_eigenvectors() {
    for dim in 2..=9 {
        let m = Operator::identity_basis(dim).unwrap();
        for x in 0..dim {
            for y in 0..dim {
                if x == 0 && y == 0 {
                    continue;
                }
                let u = Operator::bell_xform(dim, x, y).unwrap();
                for d in 0..dim {
                    let s = m.apply(&StateRegister::ket(dim, d).unwrap(), &[0]).unwrap();
                    let moved = u.apply(&s, &[0]).unwrap();
                    assert!(moved.fidelity(&s).unwrap() < 1.0 - 1e-6, "N={dim} ({x},{y}) fixes column {d}");
                }
            }
        }
    }
}

#[test]
fn misuse_is_reported() {
    assert!(matches!(Operator::shift(1), Err(Error::Domain(_))));
    let s = StateRegister::ket(3, 1).unwrap();
    assert!(matches!(Operator::fourier(3).unwrap().apply(&s, &[1]), Err(Error::Domain(_))));
    assert!(matches!(Operator::fourier(2).unwrap().apply(&s, &[0]), Err(Error::Domain(_))));
    assert!(matches!(StateRegister::ket(3, 3), Err(Error::Domain(_))));
    let big = StateRegister::ket(2, 0).unwrap();
    assert!(matches!(big.tensor_with_cap(&big, 3), Err(Error::Resource { .. })));
}

#[test]
fn canonical_roundtrip() {
    let s = random_state(3, 2, 9);
    let back = StateRegister::from_canonical(&s.to_canonical()).unwrap();
    assert_eq!(back, s);
    let json = serde_json::to_string(&s.to_canonical()).unwrap();
    assert_eq!(json, serde_json::to_string(&back.to_canonical()).unwrap());
}
