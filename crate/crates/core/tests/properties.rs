mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use swapsteer_core::linalg::{kron, partial_trace, schmidt_bipartite, ComplexMatrix, SubsystemShape, UnitVector};
use swapsteer_core::random;
use swapsteer_core::scenario::{
    correlations, expectation_values, observable_from_povm, probabilities_from_expectations, CorrelationTable, Povm,
    Strategy,
};
use swapsteer_core::witness::{witness_expectation_form, witness_value};

use common::{random_matrix, random_table};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), d in proptest::array::uniform3(1usize..4)) {
        let mut r = rng(seed);
        let a = random_matrix(&mut r, d[0], d[1]);
        let b = random_matrix(&mut r, d[1], d[2]);
        let c = random_matrix(&mut r, d[2], d[0]);
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn partial_trace_invariants(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let ra = random::density(&mut r, da);
        let rb = random::density(&mut r, db);
        let shape = SubsystemShape::new(vec![da, db], vec!["A", "B"]).unwrap();
        let joint = kron(&ra, &rb);
        prop_assert!(partial_trace(&joint, &shape, &["A"]).unwrap().max_abs_diff(&ra) < 1e-12);
        prop_assert!(partial_trace(&joint, &shape, &["B"]).unwrap().max_abs_diff(&rb) < 1e-12);
        let mixed = random::density(&mut r, da * db);
        let red = partial_trace(&mixed, &shape, &["B"]).unwrap();
        prop_assert!((red.trace() - mixed.trace()).norm() < 1e-12);
        prop_assert!(red.is_density(1e-10));
    }

    #[test]
    fn observable_invariants(seed in any::<u64>(), dim in 1usize..6, projective in any::<bool>()) {
        let mut r = rng(seed);
        let p = if projective && dim >= 4 {
            random::block_projective_povm(&mut r, 4 * (dim / 4).max(1), 4)
        } else if projective {
            random::projective_povm(&mut r, 4)
        } else {
            random::povm(&mut r, dim, 4)
        };
        let a: Vec<ComplexMatrix> = (0..4).map(|k| observable_from_povm(&p, k).unwrap()).collect();
        for k in 0..4 {
            // adjoint symmetry and contraction
            prop_assert!(a[k].adjoint().max_abs_diff(&a[(4 - k) % 4]) < 1e-12);
            let top = a[k].as_dmatrix().singular_values().max();
            prop_assert!(top <= 1.0 + 1e-12);
        }
        prop_assert!(a[0].max_abs_diff(&ComplexMatrix::identity(p.dim())) < 1e-12);
        if p.is_projective() {
            for k in 0..4 {
                prop_assert!(a[k].max_abs_diff(&a[1].pow(k as u32)) < 1e-12);
                prop_assert!(a[k].is_unitary(1e-12));
            }
        }
    }

    #[test]
    fn witness_forms_agree(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = Strategy::with_trusted_alice(random::density(&mut r, 4), random::density(&mut r, 4), random::povm(&mut r, 4, 4)).unwrap();
        let w = witness_expectation_form(&s).unwrap().value;
        prop_assert!((w - witness_value(&correlations(&s))).abs() < 1e-10);
    }

    #[test]
    fn separable_sources_respect_the_classical_bound(seed in any::<u64>(), terms in 1usize..4) {
        let mut r = rng(seed);
        let mut sources = Vec::new();
        for _ in 0..2 {
            let mut rho = ComplexMatrix::zeros(4, 4);
            for _ in 0..terms {
                let w: f64 = 1.0 / terms as f64;
                rho = &rho + &kron(&random::density(&mut r, 2), &random::density(&mut r, 2)).scale_real(w);
            }
            sources.push(rho);
        }
        let bob = random::povm(&mut r, 4, 4);
        let s = Strategy::with_trusted_alice(sources[0].clone(), sources[1].clone(), bob).unwrap();
        prop_assert!(witness_value(&correlations(&s)) <= 0.5 + 1e-10);
    }

    #[test]
    fn min_entropy_is_monotone(g1 in 1e-6f64..=1.0, g2 in 1e-6f64..=1.0) {
        use swapsteer_core::randomness::min_entropy;
        let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
        prop_assert!(min_entropy(lo).unwrap() >= min_entropy(hi).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn schmidt_reconstructs(seed in any::<u64>(), dl in 1usize..5, dr in 1usize..5) {
        let mut r = rng(seed);
        let v = random::unit_vector(&mut r, dl * dr);
        let d = schmidt_bipartite(&v, dl, dr).unwrap();
        prop_assert!((d.reconstruct() - v.as_dvector()).norm() < 1e-10);
        let total: f64 = d.coefficients.iter().map(|x| x * x).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for w in d.coefficients.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        for (i, x) in d.left.iter().enumerate() {
            for (j, y) in d.left.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((x.inner(y).norm() - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn fourier_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = CorrelationTable::new(random_table(&mut r)).unwrap();
        let back = probabilities_from_expectations(&expectation_values(&t)).unwrap();
        prop_assert!(back.max_abs_diff(&t) < 1e-12);
    }
}

#[test]
fn trusted_observable_on_computational_states() {
    // |00⟩ = (φ+ + φ-)/√2 and |01⟩ = (ψ+ + ψ-)/√2 with eigenvalues 1, i and -1, -i
    let a1 = observable_from_povm(&Povm::bell(), 1).unwrap();
    let zero = UnitVector::from_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
    let one = UnitVector::from_real(&[0.0, 1.0, 0.0, 0.0]).unwrap();
    assert!((a1.expectation(zero.as_dvector()) - swapsteer_core::linalg::c(0.5, 0.5)).norm() < 1e-12);
    assert!((a1.expectation(one.as_dvector()) - swapsteer_core::linalg::c(-0.5, -0.5)).norm() < 1e-12);
}
