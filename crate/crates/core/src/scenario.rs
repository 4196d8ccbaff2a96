//! The swap-steering network: two independent sources each send one qubit
//! to Alice (A1, A2) and one system to Bob (B1, B2). Alice measures the Bell
//! basis on A1A2, Bob performs a fixed four-outcome POVM on B1B2.
//!
//! Global subsystem order is (A1, A2, B1, B2). Sources are supplied on
//! (A_i, B_i) and rearranged explicitly.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{c, kron, permute_operator, ComplexMatrix, SubsystemShape, UnitVector, C64};

/// Number of measurement outcomes per party.
pub const OUTCOMES: usize = 4;

const POVM_TOL: f64 = 1e-10;
const PROJECTIVE_TOL: f64 = 1e-9;
const STATE_TOL: f64 = 1e-10;
const TABLE_TOL: f64 = 1e-10;

/// `ω = exp(2πi/d)` raised to `power`, exact for `d = 4`.
pub fn omega_pow(power: i64) -> C64 {
    match power.rem_euclid(OUTCOMES as i64) {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

/// The Bell basis in outcome order `φ+, φ-, ψ+, ψ-`.
pub fn bell_basis() -> [UnitVector; 4] {
    let s = FRAC_1_SQRT_2;
    [
        UnitVector::from_real(&[s, 0.0, 0.0, s]).expect("normalized"),
        UnitVector::from_real(&[s, 0.0, 0.0, -s]).expect("normalized"),
        UnitVector::from_real(&[0.0, s, s, 0.0]).expect("normalized"),
        UnitVector::from_real(&[0.0, s, -s, 0.0]).expect("normalized"),
    ]
}

/// A measurement: positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<ComplexMatrix>,
    projective: bool,
}

impl Povm {
    /// Validates positivity and completeness; invalid input is rejected, never repaired.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let dim = first.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (i, e) in elements.iter().enumerate() {
            if !e.is_square() || e.rows() != dim {
                return Err(Error::InvalidPovm(format!("element {i} has the wrong shape")));
            }
            if !e.is_hermitian(POVM_TOL) {
                return Err(Error::InvalidPovm(format!("element {i} is not Hermitian")));
            }
            let min = e.min_eigenvalue();
            if min < -POVM_TOL {
                return Err(Error::InvalidPovm(format!("element {i} has eigenvalue {min:e}")));
            }
            sum = &sum + e;
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > POVM_TOL {
            return Err(Error::InvalidPovm(format!("elements sum to identity only within {dev:e}")));
        }
        let projective = elements.iter().all(|e| (e * e).max_abs_diff(e) <= PROJECTIVE_TOL);
        Ok(Self { elements, projective })
    }

    /// Rank-one projective measurement onto an orthonormal basis.
    pub fn from_basis(vectors: &[UnitVector]) -> Result<Self> {
        Self::new(vectors.iter().map(UnitVector::projector).collect())
    }

    /// Bell-basis measurement on two qubits.
    pub fn bell() -> Self {
        Self::from_basis(&bell_basis()).expect("Bell basis is complete")
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, outcome: usize) -> &ComplexMatrix {
        &self.elements[outcome]
    }

    pub fn dim(&self) -> usize {
        self.elements[0].rows()
    }

    pub fn outcome_count(&self) -> usize {
        self.elements.len()
    }

    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// `{U E U†}`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.rows() != self.dim() || !u.is_unitary(1e-10) {
            return Err(Error::InvalidPovm("conjugation needs a unitary of matching dimension".into()));
        }
        Self::new(self.elements.iter().map(|e| &(u * e) * &u.adjoint()).collect())
    }

    /// `{E ⊗ 1_extra}`.
    pub fn tensor_identity(&self, extra: usize) -> Self {
        let id = ComplexMatrix::identity(extra);
        Self {
            elements: self.elements.iter().map(|e| kron(e, &id)).collect(),
            projective: self.projective,
        }
    }

    /// Reorders the factors every element acts on.
    pub fn permuted(&self, dims: &[usize], order: &[usize]) -> Result<Self> {
        let elements = self
            .elements
            .iter()
            .map(|e| permute_operator(e, dims, order))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { elements, projective: self.projective })
    }
}

/// `A^{(k)} = Σ_a ω^{ak} P^{(a)}`.
pub fn observable_from_povm(p: &Povm, k: usize) -> Result<ComplexMatrix> {
    let d = p.outcome_count();
    if k >= d {
        return Err(Error::IndexOutOfRange { index: k, bound: d });
    }
    if d != OUTCOMES {
        return Err(Error::InvalidPovm(format!("{d} outcomes; only d = {OUTCOMES} is supported")));
    }
    let mut out = ComplexMatrix::zeros(p.dim(), p.dim());
    for (a, e) in p.elements().iter().enumerate() {
        out = &out + &e.scale(omega_pow((a * k) as i64));
    }
    Ok(out)
}

/// Fourier family `A^{(0)}, .., A^{(d-1)}` of a four-outcome measurement.
#[derive(Clone, Debug)]
pub struct Observable {
    matrices: Vec<ComplexMatrix>,
}

impl Observable {
    pub fn from_povm(p: &Povm) -> Result<Self> {
        let matrices = (0..p.outcome_count()).map(|k| observable_from_povm(p, k)).collect::<Result<_>>()?;
        Ok(Self { matrices })
    }

    /// `A^{(k)}` with `k` taken modulo `d`.
    pub fn component(&self, k: usize) -> &ComplexMatrix {
        &self.matrices[k % self.matrices.len()]
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }
}

/// `A₀ = Σ_a i^a |φ_a⟩⟨φ_a|` over the fixed Bell order.
pub fn trusted_observable() -> Observable {
    Observable::from_povm(&Povm::bell()).expect("Bell POVM has four outcomes")
}

/// Joint distribution `p(a, b)` of Alice's and Bob's outcomes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationTable {
    p: [[f64; OUTCOMES]; OUTCOMES],
}

impl CorrelationTable {
    pub fn new(p: [[f64; OUTCOMES]; OUTCOMES]) -> Result<Self> {
        let mut total = 0.0;
        for row in &p {
            for &x in row {
                if !x.is_finite() || !(-TABLE_TOL..=1.0 + TABLE_TOL).contains(&x) {
                    return Err(Error::InvalidTable(format!("entry {x} outside [0, 1]")));
                }
                total += x;
            }
        }
        if (total - 1.0).abs() > TABLE_TOL {
            return Err(Error::InvalidTable(format!("entries sum to {total}")));
        }
        Ok(Self { p })
    }

    /// `p(a, b) = 1/16`.
    pub fn uniform() -> Self {
        Self { p: [[1.0 / 16.0; OUTCOMES]; OUTCOMES] }
    }

    /// `p(a, b) = δ_ab / 4`.
    pub fn ideal() -> Self {
        let mut p = [[0.0; OUTCOMES]; OUTCOMES];
        for (a, row) in p.iter_mut().enumerate() {
            row[a] = 0.25;
        }
        Self { p }
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.p[a][b]
    }

    pub fn rows(&self) -> &[[f64; OUTCOMES]; OUTCOMES] {
        &self.p
    }

    pub fn bob_marginal(&self) -> [f64; OUTCOMES] {
        let mut m = [0.0; OUTCOMES];
        for row in &self.p {
            for (b, x) in row.iter().enumerate() {
                m[b] += x;
            }
        }
        m
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut d: f64 = 0.0;
        for a in 0..OUTCOMES {
            for b in 0..OUTCOMES {
                d = d.max((self.p[a][b] - other.p[a][b]).abs());
            }
        }
        d
    }
}

/// `⟨A^{(k)} B^{(l)}⟩` indexed `[k][l]`.
pub type ExpectationTable = [[C64; OUTCOMES]; OUTCOMES];

/// Two-dimensional discrete Fourier transform of the joint distribution.
pub fn expectation_values(t: &CorrelationTable) -> ExpectationTable {
    let mut e = [[c(0.0, 0.0); OUTCOMES]; OUTCOMES];
    for (k, row) in e.iter_mut().enumerate() {
        for (l, slot) in row.iter_mut().enumerate() {
            for a in 0..OUTCOMES {
                for b in 0..OUTCOMES {
                    *slot += omega_pow((a * k + b * l) as i64) * t.get(a, b);
                }
            }
        }
    }
    e
}

/// Inverse transform; fails if the result is not a probability table.
pub fn probabilities_from_expectations(e: &ExpectationTable) -> Result<CorrelationTable> {
    let norm = 1.0 / (OUTCOMES * OUTCOMES) as f64;
    let mut p = [[0.0; OUTCOMES]; OUTCOMES];
    for (a, row) in p.iter_mut().enumerate() {
        for (b, slot) in row.iter_mut().enumerate() {
            let mut acc = c(0.0, 0.0);
            for (k, erow) in e.iter().enumerate() {
                for (l, val) in erow.iter().enumerate() {
                    acc += omega_pow(-((a * k + b * l) as i64)) * val;
                }
            }
            acc *= norm;
            if acc.im.abs() > TABLE_TOL {
                return Err(Error::InvalidTable(format!("p({a},{b}) has imaginary part {:e}", acc.im)));
            }
            if acc.re < -TABLE_TOL {
                return Err(Error::InvalidTable(format!("p({a},{b}) = {:e} is negative", acc.re)));
            }
            *slot = acc.re;
        }
    }
    CorrelationTable::new(p)
}

/// Two-qubit Werner-type source `v |φ+⟩⟨φ+| + (1 - v) 1/4`.
pub fn isotropic_source(v: f64) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::OutOfRange { field: "v".into(), message: format!("{v} not in [0, 1]") });
    }
    let phi = bell_basis()[0].projector();
    Ok(&phi.scale_real(v) + &ComplexMatrix::identity(4).scale_real((1.0 - v) / 4.0))
}

/// Two source states, Alice's trusted POVM and Bob's POVM.
#[derive(Clone, Debug)]
pub struct Strategy {
    source1: ComplexMatrix,
    source2: ComplexMatrix,
    alice: Povm,
    bob: Povm,
    bob_dims: (usize, usize),
}

impl Strategy {
    /// `source_i` acts on (A_i, B_i) with dim A_i = 2; Bob's POVM acts on B1 ⊗ B2.
    pub fn new(source1: ComplexMatrix, source2: ComplexMatrix, alice: Povm, bob: Povm) -> Result<Self> {
        let mut bob_dims = [0usize; 2];
        for (i, s) in [&source1, &source2].into_iter().enumerate() {
            if !s.is_square() || s.rows() < 2 || s.rows() % 2 != 0 {
                return Err(Error::DimensionMismatch(format!(
                    "source {} must act on C^2 ⊗ H_B (got dimension {})",
                    i + 1,
                    s.rows()
                )));
            }
            if !s.is_density(STATE_TOL) {
                return Err(Error::InvalidState(format!("source {} is not a density operator", i + 1)));
            }
            bob_dims[i] = s.rows() / 2;
        }
        if alice.dim() != 4 || alice.outcome_count() != OUTCOMES {
            return Err(Error::DimensionMismatch("Alice's POVM must have four outcomes on A1A2".into()));
        }
        if bob.outcome_count() != OUTCOMES {
            return Err(Error::DimensionMismatch("Bob's POVM must have four outcomes".into()));
        }
        if bob.dim() != bob_dims[0] * bob_dims[1] {
            return Err(Error::DimensionMismatch(format!(
                "Bob's POVM acts on dimension {} but the sources deliver {}x{}",
                bob.dim(),
                bob_dims[0],
                bob_dims[1]
            )));
        }
        Ok(Self { source1, source2, alice, bob, bob_dims: (bob_dims[0], bob_dims[1]) })
    }

    /// Trusted Bell measurement for Alice.
    pub fn with_trusted_alice(source1: ComplexMatrix, source2: ComplexMatrix, bob: Povm) -> Result<Self> {
        Self::new(source1, source2, Povm::bell(), bob)
    }

    /// Both sources `|φ+⟩`, both parties measure the Bell basis.
    pub fn ideal() -> Self {
        Self::isotropic(1.0).expect("v = 1 in range")
    }

    /// Both sources `v φ+ + (1 - v) 1/4`, Bob measures the Bell basis.
    pub fn isotropic(v: f64) -> Result<Self> {
        let s = isotropic_source(v)?;
        Self::with_trusted_alice(s.clone(), s, Povm::bell())
    }

    /// Both sources `|00⟩`, Bob measures the Bell basis.
    pub fn product() -> Self {
        let s = UnitVector::basis(4, 0).projector();
        Self::with_trusted_alice(s.clone(), s, Povm::bell()).expect("valid product strategy")
    }

    /// Applies Bob-local unitaries `V1` on B1 and `V2` on B2 to the sources
    /// and conjugates Bob's POVM accordingly; statistics are unchanged.
    pub fn scrambled(&self, v1: &ComplexMatrix, v2: &ComplexMatrix) -> Result<Self> {
        let w1 = kron(&ComplexMatrix::identity(2), v1);
        let w2 = kron(&ComplexMatrix::identity(2), v2);
        let s1 = &(&w1 * &self.source1) * &w1.adjoint();
        let s2 = &(&w2 * &self.source2) * &w2.adjoint();
        let bob = self.bob.conjugated(&kron(v1, v2))?;
        Self::new(s1, s2, self.alice.clone(), bob)
    }

    pub fn source1(&self) -> &ComplexMatrix {
        &self.source1
    }

    pub fn source2(&self) -> &ComplexMatrix {
        &self.source2
    }

    pub fn alice(&self) -> &Povm {
        &self.alice
    }

    pub fn bob(&self) -> &Povm {
        &self.bob
    }

    /// Dimensions of B1 and B2.
    pub fn bob_dims(&self) -> (usize, usize) {
        self.bob_dims
    }

    /// Shape `(A1, A2, B1, B2)` of the arranged state.
    pub fn shape(&self) -> SubsystemShape {
        SubsystemShape::new(vec![2, 2, self.bob_dims.0, self.bob_dims.1], vec!["A1", "A2", "B1", "B2"])
            .expect("valid labels")
    }

    /// `source1 ⊗ source2` reordered from (A1, B1, A2, B2) to (A1, A2, B1, B2).
    pub fn arranged_state(&self) -> ComplexMatrix {
        let joint = kron(&self.source1, &self.source2);
        permute_operator(&joint, &[2, self.bob_dims.0, 2, self.bob_dims.1], &[0, 2, 1, 3])
            .expect("dimensions consistent by construction")
    }
}

/// Reorders a product of (A1, B1) and (A2, B2) vectors to (A1, A2, B1, B2).
pub fn arrange_product_vector(psi1: &DVector<C64>, psi2: &DVector<C64>) -> DVector<C64> {
    let b1 = psi1.len() / 2;
    let b2 = psi2.len() / 2;
    crate::linalg::permute_vector(&psi1.kronecker(psi2), &[2, b1, 2, b2], &[0, 2, 1, 3])
        .expect("dimensions consistent by construction")
}

/// `p(a, b) = Tr[(M_a ⊗ N_b) ρ]` for a joint state on Alice's four-dimensional
/// space followed by Bob's space.
pub fn joint_correlations(rho: &ComplexMatrix, alice: &Povm, bob: &Povm) -> Result<CorrelationTable> {
    if rho.rows() != alice.dim() * bob.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} against POVMs of dimension {}x{}",
            rho.rows(),
            alice.dim(),
            bob.dim()
        )));
    }
    let shape = SubsystemShape::new(vec![alice.dim(), bob.dim()], vec!["A", "B"])?;
    let mut p = [[0.0; OUTCOMES]; OUTCOMES];
    for (a, m) in alice.elements().iter().enumerate() {
        let local = &kron(m, &ComplexMatrix::identity(bob.dim())) * rho;
        let bob_part = crate::linalg::partial_trace(&local, &shape, &["B"])?;
        for (b, n) in bob.elements().iter().enumerate() {
            p[a][b] = n.trace_with(&bob_part).re;
        }
    }
    CorrelationTable::new(p)
}

/// Correlations produced by a strategy.
pub fn correlations(s: &Strategy) -> CorrelationTable {
    joint_correlations(&s.arranged_state(), &s.alice, &s.bob).expect("strategy dimensions validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::re;

    #[test]
    fn bell_basis_orthonormal_and_real() {
        let b = bell_basis();
        for i in 0..4 {
            for j in 0..4 {
                let ip = b[i].inner(&b[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip - re(want)).norm() < 1e-15);
            }
            assert!(b[i].amplitudes().iter().all(|z| z.im == 0.0));
        }
        let s = FRAC_1_SQRT_2;
        assert_eq!(b[0].amplitudes(), &[re(s), re(0.0), re(0.0), re(s)]);
    }

    #[test]
    fn trusted_observable_spectrum_and_powers() {
        let a0 = trusted_observable();
        let a = a0.component(1);
        let b = bell_basis();
        for (k, phi) in b.iter().enumerate() {
            let out = a.apply(phi.as_dvector());
            assert!((out - phi.as_dvector() * omega_pow(k as i64)).norm() < 1e-15);
        }
        assert!(a.pow(4).max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        assert!(a.transpose().max_abs_diff(a) < 1e-15);
        assert!(a.is_unitary(1e-14));
    }

    #[test]
    fn observable_components() {
        let p = Povm::bell();
        assert!(observable_from_povm(&p, 0).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let a1 = observable_from_povm(&p, 1).unwrap();
        let a3 = observable_from_povm(&p, 3).unwrap();
        assert!(a3.max_abs_diff(&a1.adjoint()) < 1e-15);
        assert!(matches!(
            observable_from_povm(&p, 4),
            Err(Error::IndexOutOfRange { index: 4, bound: 4 })
        ));
    }

    #[test]
    fn povm_validation_rejects() {
        let half = ComplexMatrix::identity(2).scale_real(0.5);
        assert!(Povm::new(vec![half.clone(), half.clone()]).is_ok());
        assert!(Povm::new(vec![half.clone()]).is_err());
        let neg = ComplexMatrix::diagonal(&[re(1.5), re(0.5)]);
        let neg2 = ComplexMatrix::diagonal(&[re(-0.5), re(0.5)]);
        assert!(matches!(Povm::new(vec![neg, neg2]), Err(Error::InvalidPovm(_))));
        assert!(!Povm::new(vec![half.clone(), half]).unwrap().is_projective());
        assert!(Povm::bell().is_projective());
    }

    #[test]
    fn ideal_correlations() {
        // oracle: brute-force inner products of Bell vectors against the
        // rearranged |φ+⟩|φ+⟩, built index by index
        let b = bell_basis();
        let s = FRAC_1_SQRT_2;
        let mut phi4 = vec![0.0; 16];
        for i in 0..2 {
            for j in 0..2 {
                // A1=i, A2=j, B1=i, B2=j
                phi4[i * 8 + j * 4 + i * 2 + j] = s * s;
            }
        }
        let t = correlations(&Strategy::ideal());
        for a in 0..4 {
            for bb in 0..4 {
                let mut amp = 0.0;
                for x in 0..4 {
                    for y in 0..4 {
                        amp += b[a].amplitudes()[x].re * b[bb].amplitudes()[y].re * phi4[x * 4 + y];
                    }
                }
                assert!((t.get(a, bb) - amp * amp).abs() < 1e-15);
                let want = if a == bb { 0.25 } else { 0.0 };
                assert!((t.get(a, bb) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn product_and_noise_correlations() {
        let t = correlations(&Strategy::product());
        for a in 0..4 {
            for b in 0..4 {
                let want = if a < 2 && b < 2 { 0.25 } else { 0.0 };
                assert!((t.get(a, b) - want).abs() < 1e-15);
            }
        }
        let t = correlations(&Strategy::isotropic(0.0).unwrap());
        assert!(t.max_abs_diff(&CorrelationTable::uniform()) < 1e-15);
    }

    #[test]
    fn fourier_examples() {
        let e = expectation_values(&CorrelationTable::uniform());
        for k in 0..4 {
            for l in 0..4 {
                let want = if k == 0 && l == 0 { 1.0 } else { 0.0 };
                assert!((e[k][l] - re(want)).norm() < 1e-15);
            }
        }
        let e = expectation_values(&CorrelationTable::ideal());
        for k in 0..4 {
            for l in 0..4 {
                let want = if (k + l) % 4 == 0 { 1.0 } else { 0.0 };
                assert!((e[k][l] - re(want)).norm() < 1e-15);
            }
        }
        let back = probabilities_from_expectations(&e).unwrap();
        assert!(back.max_abs_diff(&CorrelationTable::ideal()) < 1e-15);
        let mut delta = [[c(0.0, 0.0); 4]; 4];
        delta[0][0] = re(1.0);
        let p = probabilities_from_expectations(&delta).unwrap();
        assert!(p.max_abs_diff(&CorrelationTable::uniform()) < 1e-15);
        let mut bad = delta;
        bad[0][1] = re(2.0);
        assert!(matches!(probabilities_from_expectations(&bad), Err(Error::InvalidTable(_))));
    }

    #[test]
    fn isotropic_source_endpoints() {
        assert!(isotropic_source(1.0).unwrap().max_abs_diff(&bell_basis()[0].projector()) < 1e-15);
        assert!(isotropic_source(0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-15);
        assert!(matches!(isotropic_source(1.2), Err(Error::OutOfRange { .. })));
        let (vals, _) = crate::linalg::eig_hermitian(&isotropic_source(0.8).unwrap()).unwrap();
        for (g, w) in vals.iter().zip([0.85, 0.05, 0.05, 0.05]) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn strategy_rejects_bad_dimensions() {
        let s = isotropic_source(1.0).unwrap();
        let bob3 = Povm::new(vec![
            ComplexMatrix::identity(3).scale_real(0.25),
            ComplexMatrix::identity(3).scale_real(0.25),
            ComplexMatrix::identity(3).scale_real(0.25),
            ComplexMatrix::identity(3).scale_real(0.25),
        ])
        .unwrap();
        assert!(matches!(
            Strategy::with_trusted_alice(s.clone(), s.clone(), bob3),
            Err(Error::DimensionMismatch(_))
        ));
        let not_state = ComplexMatrix::identity(4);
        assert!(matches!(
            Strategy::with_trusted_alice(not_state, s, Povm::bell()),
            Err(Error::InvalidState(_))
        ));
    }
}
