mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nalgebra::DVector;
use swapsteer_core::linalg::ComplexMatrix;
use swapsteer_core::random;
use swapsteer_core::randomness::{
    certify, entangled_source_attack, eve_consistency_check, guessing_probability, optimize_eve, CertificationStatus,
    CertifyConfig, EveConfig, EveStrategy, CONSISTENCY_TOL,
};
use swapsteer_core::scenario::{correlations, CorrelationTable, Strategy};
use swapsteer_core::witness::witness_value;

#[test]
fn any_eve_measurement_on_the_ideal_purification_guesses_a_quarter() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let ideal = Strategy::ideal();
    let target = correlations(&ideal);
    for trial in 0..100 {
        let dim = 2 + trial % 4;
        let eve = random::povm(&mut rng, dim, 4);
        let u = random::unitary(&mut rng, dim);
        let e = EveStrategy::from_strategy(&ideal, dim, eve.clone()).unwrap().rotate_eve(&u).unwrap();
        let g = guessing_probability(&e, &target, CONSISTENCY_TOL).unwrap();
        assert!((g - 0.25).abs() < 1e-12, "trial {trial}: {g}");

        // the state factorizes as |ψ_AB⟩ ⊗ U|0⟩, so G = Σ_b ¼ ⟨aux|E_b|aux⟩
        let aux: DVector<_> = u.as_dmatrix().column(0).into_owned();
        let oracle: f64 = (0..4).map(|b| 0.25 * eve.element(b).expectation(&aux).re).sum();
        assert!((g - oracle).abs() < 1e-12);
    }
}

#[test]
fn optimizer_finds_nothing_on_the_ideal_table() {
    let target = correlations(&Strategy::ideal());
    let cfg = EveConfig { restarts: 4, iterations: 100, ..EveConfig::default() };
    for seed in 0..20 {
        let opt = optimize_eve(&target, &cfg, seed).unwrap();
        assert!((opt.guessing_probability - 0.25).abs() <= 1e-4, "seed {seed}: {}", opt.guessing_probability);
    }
}

#[test]
fn optimizer_output_is_a_consistent_strategy() {
    let target = correlations(&Strategy::isotropic(0.9).unwrap());
    let opt = optimize_eve(&target, &EveConfig::default(), 3).unwrap();
    let check = eve_consistency_check(&opt.strategy, &target, CONSISTENCY_TOL).unwrap();
    assert!(check.passed, "deviation {}", check.deviation);
    let g = guessing_probability(&opt.strategy, &target, CONSISTENCY_TOL).unwrap();
    assert!((g - opt.guessing_probability).abs() < 1e-9);
    let weights: f64 = opt.components.iter().map(|(w, _)| w).sum();
    assert!((weights - 1.0).abs() < 1e-9);

    // Eve can always split the table into the ideal part and uniform noise
    let v2 = 0.81;
    let mixture = v2 * 0.25 + (1.0 - v2);
    assert!(opt.guessing_probability >= mixture - 1e-6, "{} < {mixture}", opt.guessing_probability);
    assert!(opt.guessing_probability <= 1.0 + 1e-12);

    // block ascent never decreases within one (round, restart)
    for w in opt.trace.windows(2) {
        if w[0].round == w[1].round && w[0].restart == w[1].restart {
            assert!(w[1].value >= w[0].value - 1e-10, "{:?} -> {:?}", w[0], w[1]);
        }
    }
    for w in opt.master_objective.windows(2) {
        assert!(w[1] >= w[0] - 1e-9);
    }
}

#[test]
fn certification_outcomes() {
    let cfg = CertifyConfig::default();
    let ideal = certify(&Strategy::ideal(), &cfg, 0).unwrap();
    assert_eq!(ideal.status, CertificationStatus::Certified2Bits);
    assert!(ideal.certified);
    assert_eq!(ideal.min_entropy_bits, 2.0);

    let noisy = certify(&Strategy::isotropic(0.9).unwrap(), &cfg, 0).unwrap();
    assert_eq!(noisy.status, CertificationStatus::HeuristicBound);
    assert!(!noisy.certified);
    assert!(noisy.min_entropy_bits < 2.0);
    assert!(noisy.caveats.iter().any(|c| c.contains("not a certificate")));

    let product = certify(&Strategy::product(), &cfg, 0).unwrap();
    assert!(!product.certified);
    assert!((product.guessing_probability - 1.0).abs() < 1e-6);
    assert!(product.min_entropy_bits.abs() < 1e-5);
}

#[test]
fn entangled_sources_fake_the_violation() {
    let demo = entangled_source_attack().unwrap();
    assert!((demo.witness - 1.0).abs() < 1e-12);
    assert!((demo.guessing_probability - 1.0).abs() < 1e-12);
    let ideal = correlations(&Strategy::ideal());
    assert!(demo.table.max_abs_diff(&ideal) < 1e-12);
    assert!((witness_value(&demo.table) - 1.0).abs() < 1e-12);
    let check = eve_consistency_check(&demo.strategy, &ideal, CONSISTENCY_TOL).unwrap();
    assert!(check.passed);
}

#[test]
fn inconsistent_eve_is_rejected() {
    let ideal = Strategy::ideal();
    let e = EveStrategy::from_strategy(&ideal, 2, swapsteer_core::scenario::Povm::new(vec![
        ComplexMatrix::identity(2),
        ComplexMatrix::zeros(2, 2),
        ComplexMatrix::zeros(2, 2),
        ComplexMatrix::zeros(2, 2),
    ]).unwrap())
    .unwrap();
    let other = CorrelationTable::new([[1.0 / 16.0; 4]; 4]).unwrap();
    assert!(!eve_consistency_check(&e, &other, CONSISTENCY_TOL).unwrap().passed);
    assert!(guessing_probability(&e, &other, CONSISTENCY_TOL).is_err());
}
