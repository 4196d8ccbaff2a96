//! Seeded random states, unitaries and measurements.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, polar_unitary, re, spectral_map, ComplexMatrix, UnitVector, C64};
use crate::scenario::Povm;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> UnitVector {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    UnitVector::normalized(v).expect("gaussian vector is nonzero")
}

/// Haar-random unitary (polar factor of a Ginibre matrix).
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    ComplexMatrix::wrap(polar_unitary(&g))
}

/// Random full-rank density operator `G G† / Tr(G G†)`.
pub fn density<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let t = m.trace().re;
    ComplexMatrix::wrap(m / re(t))
}

/// Random POVM `S^{-1/2} G_b† G_b S^{-1/2}` with `S = Σ_b G_b† G_b`.
pub fn povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    let raw: Vec<ComplexMatrix> = (0..outcomes)
        .map(|_| {
            let g = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
            ComplexMatrix::wrap(g.adjoint() * g)
        })
        .collect();
    let mut s = ComplexMatrix::zeros(dim, dim);
    for r in &raw {
        s = &s + r;
    }
    let s = ComplexMatrix::wrap((s.as_dmatrix() + s.adjoint().as_dmatrix()) * re(0.5));
    let inv_sqrt = spectral_map(&s, |x| 1.0 / x.sqrt()).expect("Hermitian");
    let elements = raw
        .iter()
        .map(|r| {
            let e = &(&inv_sqrt * r) * &inv_sqrt;
            ComplexMatrix::wrap((e.as_dmatrix() + e.adjoint().as_dmatrix()) * re(0.5))
        })
        .collect();
    Povm::new(elements).expect("normalized by construction")
}

/// Rank-one projective measurement in a Haar-random basis (`outcomes == dim`).
pub fn projective_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Povm {
    let u = unitary(rng, dim);
    let basis: Vec<UnitVector> = (0..dim)
        .map(|j| UnitVector::normalized(u.column(j).into_owned()).expect("unitary column"))
        .collect();
    Povm::from_basis(&basis).expect("orthonormal basis")
}

/// Random projective measurement with `outcomes` blocks of equal rank on
/// `dim = outcomes * rank` dimensions.
pub fn block_projective_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, outcomes: usize) -> Povm {
    assert_eq!(dim % outcomes, 0, "dimension must split into equal blocks");
    let rank = dim / outcomes;
    let u = unitary(rng, dim);
    let elements = (0..outcomes)
        .map(|b| {
            let cols = u.columns(b * rank, rank);
            ComplexMatrix::wrap(cols * cols.adjoint())
        })
        .collect();
    Povm::new(elements).expect("orthogonal projectors")
}
