mod common;

use swapsteer_core::linalg::UnitVector;
use swapsteer_core::scenario::{correlations, Strategy};
use swapsteer_core::witness::{lhs_bound, lhs_point_value, witness_expectation_form, witness_value, LhsConfig};

use common::{direct_isotropic_witness, direct_table, isotropic_array, lhs_grid_max};

fn grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

#[test]
fn isotropic_sweep_matches_direct_oracle() {
    for v in grid() {
        let s = Strategy::isotropic(v).unwrap();
        let oracle = direct_isotropic_witness(v);
        assert!((witness_value(&correlations(&s)) - oracle).abs() < 1e-10, "v = {v}");
        assert!((witness_expectation_form(&s).unwrap().value - oracle).abs() < 1e-10, "v = {v}");
    }
}

#[test]
fn isotropic_closed_form_after_oracle() {
    // the oracle table itself is v² δ/4 + (1 - v²)/16
    for v in grid() {
        let r = isotropic_array(v);
        let p = direct_table(&r, &r);
        for a in 0..4 {
            for b in 0..4 {
                let want = v * v * if a == b { 0.25 } else { 0.0 } + (1.0 - v * v) / 16.0;
                assert!((p[a][b] - want).abs() < 1e-12);
            }
        }
        assert!((direct_isotropic_witness(v) - (1.0 + 3.0 * v * v) / 4.0).abs() < 1e-12);
        let t = correlations(&Strategy::isotropic(v).unwrap());
        assert!((witness_value(&t) - (1.0 + 3.0 * v * v) / 4.0).abs() < 1e-10);
    }
}

#[test]
fn lhs_optimizer_matches_grid_oracle() {
    let oracle = lhs_grid_max(0.01);
    assert!((oracle - 0.5).abs() < 1e-9, "grid max {oracle}");
    let est = lhs_bound(&LhsConfig::default(), 7).unwrap();
    assert!((est.beta - oracle).abs() < 1e-6);
    assert!((est.beta - 0.5).abs() < 1e-6);
    // the argmax really attains the value
    let a = est.argmax.first.state();
    let b = est.argmax.second.state();
    assert!((lhs_point_value(&a, &b, est.argmax.outcome) - est.beta).abs() < 1e-12);
}

#[test]
fn lhs_seeds_agree() {
    for seed in 0..5 {
        let est = lhs_bound(&LhsConfig { restarts: 32, max_iterations: 500 }, seed).unwrap();
        assert!((est.beta - 0.5).abs() < 1e-6, "seed {seed}: {}", est.beta);
    }
}

/// Two hidden values per source, Bloch-axis states, weights on a grid and
/// every response function of Bob: no mixture beats the best single point.
#[test]
fn mixtures_do_not_beat_deterministic_points() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let axis: Vec<UnitVector> = vec![
        UnitVector::from_real(&[1.0, 0.0]).unwrap(),
        UnitVector::from_real(&[0.0, 1.0]).unwrap(),
        UnitVector::from_real(&[h, h]).unwrap(),
        UnitVector::from_real(&[h, -h]).unwrap(),
        UnitVector::new(vec![swapsteer_core::linalg::c(h, 0.0), swapsteer_core::linalg::c(0.0, h)]).unwrap(),
        UnitVector::new(vec![swapsteer_core::linalg::c(h, 0.0), swapsteer_core::linalg::c(0.0, -h)]).unwrap(),
    ];
    // value[i][j][b] for Alice holding axis[i] ⊗ axis[j] and Bob announcing b
    let mut value = vec![vec![[0.0; 4]; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            for b in 0..4 {
                value[i][j][b] = lhs_point_value(&axis[i], &axis[j], b);
            }
        }
    }
    let single = value.iter().flatten().flat_map(|v| v.iter()).cloned().fold(0.0, f64::max);
    assert!((single - 0.5).abs() < 1e-12);

    let qs = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut best: f64 = 0.0;
    for s0 in 0..6 {
        for s1 in 0..6 {
            for t0 in 0..6 {
                for t1 in 0..6 {
                    let sig = [s0, s1];
                    let tau = [t0, t1];
                    for &q1 in &qs {
                        for &q2 in &qs {
                            let w1 = [q1, 1.0 - q1];
                            let w2 = [q2, 1.0 - q2];
                            for f in 0..256usize {
                                let mut total = 0.0;
                                for l1 in 0..2 {
                                    for l2 in 0..2 {
                                        let b = (f >> (2 * (2 * l1 + l2))) & 3;
                                        total += w1[l1] * w2[l2] * value[sig[l1]][tau[l2]][b];
                                    }
                                }
                                best = best.max(total);
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(best <= 0.5 + 1e-12);
    assert!((best - 0.5).abs() < 1e-12);
}
