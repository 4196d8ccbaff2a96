//! Test helpers and independent oracles. The oracles use plain `f64`
//! arithmetic and explicit index loops rather than library routines.
#![allow(dead_code)]

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use swapsteer_core::linalg::{c, ComplexMatrix, C64};

/// Real Bell vectors in the order φ+, φ-, ψ+, ψ- over |00⟩, |01⟩, |10⟩, |11⟩.
pub const BELL: [[f64; 4]; 4] = [
    [FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2],
    [FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2],
    [0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0],
    [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0],
];

/// `v φ+ + (1 - v) 1/4` as a real 4×4 array indexed by (a, b) pairs.
pub fn isotropic_array(v: f64) -> [[f64; 4]; 4] {
    let mut r = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = v * BELL[0][i] * BELL[0][j] + if i == j { (1.0 - v) / 4.0 } else { 0.0 };
        }
    }
    r
}

/// `p(a, b)` for two real qubit-pair sources with Alice and Bob both
/// measuring the Bell basis, summed index by index.
pub fn direct_table(r1: &[[f64; 4]; 4], r2: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut p = [[0.0; 4]; 4];
    for (a, row) in p.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for a1 in 0..2 {
                for b1 in 0..2 {
                    for a2 in 0..2 {
                        for b2 in 0..2 {
                            for a1p in 0..2 {
                                for b1p in 0..2 {
                                    for a2p in 0..2 {
                                        for b2p in 0..2 {
                                            let rho = r1[2 * a1 + b1][2 * a1p + b1p] * r2[2 * a2 + b2][2 * a2p + b2p];
                                            if rho == 0.0 {
                                                continue;
                                            }
                                            let alice = BELL[a][2 * a1 + a2] * BELL[a][2 * a1p + a2p];
                                            let bob = BELL[b][2 * b1 + b2] * BELL[b][2 * b1p + b2p];
                                            acc += rho * alice * bob;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            *slot = acc;
        }
    }
    p
}

pub fn direct_isotropic_witness(v: f64) -> f64 {
    let r = isotropic_array(v);
    let p = direct_table(&r, &r);
    (0..4).map(|a| p[a][a]).sum()
}

/// `max_b |⟨φ_b|u ⊗ w⟩|²` for Bloch angles, written out in components.
pub fn lhs_point(t1: f64, p1: f64, t2: f64, p2: f64) -> f64 {
    let (s1, c1) = (t1 / 2.0).sin_cos();
    let (s2, c2) = (t2 / 2.0).sin_cos();
    // u ⊗ w = (c1c2, c1 s2 e^{ip2}, s1 c2 e^{ip1}, s1 s2 e^{i(p1+p2)})
    let phi_sum = |sign: f64| {
        let re = c1 * c2 + sign * s1 * s2 * (p1 + p2).cos();
        let im = sign * s1 * s2 * (p1 + p2).sin();
        (re * re + im * im) / 2.0
    };
    let psi = |sign: f64| {
        let re = c1 * s2 * p2.cos() + sign * s1 * c2 * p1.cos();
        let im = c1 * s2 * p2.sin() + sign * s1 * c2 * p1.sin();
        (re * re + im * im) / 2.0
    };
    phi_sum(1.0).max(phi_sum(-1.0)).max(psi(1.0)).max(psi(-1.0))
}

/// Dense grid over (θ1, θ2, φ1) with φ2 = 0. Each Bell overlap depends on
/// φ1 + φ2 or φ1 - φ2 only, so fixing φ2 loses nothing.
pub fn lhs_grid_max(step: f64) -> f64 {
    let nt = (PI / step).ceil() as usize;
    let np = (TAU / step).ceil() as usize;
    let thetas: Vec<f64> = (0..=nt).map(|i| (i as f64 * step).min(PI)).collect();
    let mut best: f64 = 0.0;
    for &t1 in &thetas {
        for &t2 in &thetas {
            for k in 0..np {
                best = best.max(lhs_point(t1, k as f64 * step, t2, 0.0));
            }
        }
    }
    best
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_dmatrix(DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))).unwrap()
}

/// Random probability table with a few exact zeros.
pub fn random_table<R: Rng + ?Sized>(rng: &mut R) -> [[f64; 4]; 4] {
    let mut p = [[0.0; 4]; 4];
    let mut total = 0.0;
    for row in p.iter_mut() {
        for x in row.iter_mut() {
            *x = if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() };
            total += *x;
        }
    }
    if total == 0.0 {
        p[0][0] = 1.0;
        return p;
    }
    for row in p.iter_mut() {
        for x in row.iter_mut() {
            *x /= total;
        }
    }
    p
}
