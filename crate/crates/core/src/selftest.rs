//! Constructive self-testing from maximal violation of the swap-steering
//! witness.
//!
//! Given a strategy with `W = 1`, this module
//!
//! 1. checks that Bob's observable `B₀` is unitary on the support of his
//!    local state (his measurement is projective),
//! 2. splits the two sources into their eigen-ensembles `ψ¹_s`, `ψ²_{s'}`,
//! 3. builds the block unitaries `U_i = ⊕_s U_{s,i}` from the Schmidt data
//!    (`U_{s,i}|f_{j,i,s}⟩ = |e*_{j,i,s}⟩ ⊗ |s⟩`),
//! 4. checks the orthogonality of the Bell-frame vectors `g^a_{ss'}` and of
//!    Bob's local supports, and
//! 5. measures how far `(1 ⊗ U₁ ⊗ U₂) ρ (…)†` and `(U₁ ⊗ U₂) B₀ (…)†` are from
//!    `|φ+⟩|φ+⟩ ⊗ junk` and `A₀ ⊗ 1`.
//!
//! After extraction Bob's `B_i` is ordered `(B_i', B_i'')`: a qubit followed
//! by a junk factor of dimension `dim(B_i) / 2`.

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    c, eig_hermitian, fidelity, kron, partial_trace, permute_operator, re, schmidt_bipartite,
    support_projector, ComplexMatrix, SchmidtDecomposition, SubsystemShape, UnitVector, C64, STRUCTURAL_TOL,
};
use crate::scenario::{
    arrange_product_vector, bell_basis, joint_correlations, observable_from_povm, omega_pow, trusted_observable,
    Povm, Strategy, OUTCOMES,
};
use crate::witness::witness_value;

/// Default tolerance on `1 - W` for the maximal-violation premise.
pub const PREMISE_TOL: f64 = 1e-7;
/// Eigenvalues of `ρ_B` below this count as zero.
pub const RANK_TOL: f64 = 1e-8;
const DROP_EIGENVALUE: f64 = 1e-12;
const ORTHOGONALITY_TOL: f64 = 1e-9;
const SCHMIDT_RANK_TOL: f64 = 1e-8;
const SUPPORT_OVERLAP_TOL: f64 = 1e-8;

/// `ρ_AB = Σ_{s,s'} p_{s,s'} ψ¹_s ⊗ ψ²_{s'}` with pure terms on (A1, B1) and (A2, B2).
#[derive(Clone, Debug)]
pub struct SourceEnsemble {
    weights: Vec<Vec<f64>>,
    source1: Vec<UnitVector>,
    source2: Vec<UnitVector>,
}

impl SourceEnsemble {
    /// General separable ensemble; `weights[s][s']` may be correlated.
    pub fn new(weights: Vec<Vec<f64>>, source1: Vec<UnitVector>, source2: Vec<UnitVector>) -> Result<Self> {
        if source1.is_empty() || source2.is_empty() {
            return Err(Error::InvalidState("empty ensemble".into()));
        }
        if weights.len() != source1.len() || weights.iter().any(|row| row.len() != source2.len()) {
            return Err(Error::DimensionMismatch("weight matrix does not match the ensemble".into()));
        }
        let total: f64 = weights.iter().flatten().sum();
        if weights.iter().flatten().any(|&w| w < 0.0 || !w.is_finite()) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("weights must be nonnegative and sum to 1 (sum {total})")));
        }
        for (i, family) in [&source1, &source2].into_iter().enumerate() {
            let dim = family[0].dim();
            if dim < 2 || dim % 2 != 0 || family.iter().any(|v| v.dim() != dim) {
                return Err(Error::DimensionMismatch(format!("source {} vectors must live on C^2 ⊗ H_B", i + 1)));
            }
            for (s, a) in family.iter().enumerate() {
                for b in &family[..s] {
                    let overlap = a.inner(b).norm();
                    if overlap > ORTHOGONALITY_TOL {
                        return Err(Error::InvalidState(format!(
                            "source {} terms are not orthogonal (overlap {overlap:e})",
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(Self { weights, source1, source2 })
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn source1(&self) -> &[UnitVector] {
        &self.source1
    }

    pub fn source2(&self) -> &[UnitVector] {
        &self.source2
    }

    pub fn bob_dims(&self) -> (usize, usize) {
        (self.source1[0].dim() / 2, self.source2[0].dim() / 2)
    }

    fn family(&self, source: usize) -> &[UnitVector] {
        if source == 1 {
            &self.source1
        } else {
            &self.source2
        }
    }

    /// Reconstructed state in (A1, A2, B1, B2) order.
    pub fn density(&self) -> ComplexMatrix {
        let (b1, b2) = self.bob_dims();
        let dim = 4 * b1 * b2;
        let mut rho = ComplexMatrix::zeros(dim, dim);
        for (s, row) in self.weights.iter().enumerate() {
            for (t, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let v = arrange_product_vector(self.source1[s].as_dvector(), self.source2[t].as_dvector());
                let p = ComplexMatrix::wrap(&v * v.adjoint());
                rho = &rho + &p.scale_real(w);
            }
        }
        rho
    }
}

/// Spectral ensemble of each source; eigenvalues below `1e-12` are dropped.
pub fn eigendecompose_separable(source1: &ComplexMatrix, source2: &ComplexMatrix) -> Result<SourceEnsemble> {
    let mut weights = Vec::new();
    let mut families = Vec::new();
    for (i, s) in [source1, source2].into_iter().enumerate() {
        if !s.is_square() || s.rows() < 2 || s.rows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!("source {} must act on C^2 ⊗ H_B", i + 1)));
        }
        if !s.is_density(1e-10) {
            return Err(Error::InvalidState(format!("source {} is not a density operator", i + 1)));
        }
        let (vals, vecs) = eig_hermitian(s)?;
        let mut w = Vec::new();
        let mut v = Vec::new();
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda > DROP_EIGENVALUE {
                w.push(lambda);
                v.push(UnitVector::normalized(vecs.column(k).into_owned())?);
            }
        }
        let total: f64 = w.iter().sum();
        weights.push(w.into_iter().map(|x| x / total).collect::<Vec<_>>());
        families.push(v);
    }
    let joint = weights[0].iter().map(|p| weights[1].iter().map(|q| p * q).collect()).collect();
    let source2 = families.pop().expect("two families");
    let source1 = families.pop().expect("two families");
    SourceEnsemble::new(joint, source1, source2)
}

/// Outcome of the projectivity check on Bob's observable.
#[derive(Clone, Copy, Debug)]
pub struct ProjectivityCheck {
    pub passed: bool,
    /// `max(‖B₀B₀† - 1‖_F, ‖B₀†B₀ - 1‖_F)`.
    pub defect: f64,
}

fn bob_state(s: &Strategy) -> Result<ComplexMatrix> {
    partial_trace(&s.arranged_state(), &s.shape(), &["B1", "B2"])
}

/// Requires a full-rank `ρ_B`; Bob's measurement can only be characterized on
/// its support.
pub fn check_projective(s: &Strategy, tol: f64) -> Result<ProjectivityCheck> {
    let rho_b = bob_state(s)?;
    let min_eigenvalue = rho_b.min_eigenvalue();
    if min_eigenvalue < RANK_TOL {
        return Err(Error::RankDeficient { min_eigenvalue });
    }
    let b0 = observable_from_povm(s.bob(), 1)?;
    let id = ComplexMatrix::identity(b0.rows());
    let defect = (&(&b0 * &b0.adjoint()) - &id)
        .frobenius_norm()
        .max((&(&b0.adjoint() * &b0) - &id).frobenius_norm());
    Ok(ProjectivityCheck { passed: defect <= tol, defect })
}

/// `max(‖Π B₀ Π (Π B₀ Π)† - Π‖, ‖(Π B₀ Π)† Π B₀ Π - Π‖)` for the support projector Π.
fn projective_defect_on_support(b0: &ComplexMatrix, support: &ComplexMatrix) -> f64 {
    let bar = &(support * b0) * support;
    (&(&bar * &bar.adjoint()) - support)
        .frobenius_norm()
        .max((&(&bar.adjoint() * &bar) - support).frobenius_norm())
}

/// `U₁`, `U₂` mapping each source onto `|φ+⟩_{A_i B_i'} ⊗ |s⟩_{B_i''}`.
#[derive(Clone, Debug)]
pub struct LocalUnitaries {
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    /// Junk dimensions `(dim B1'', dim B2'')`.
    pub junk_dims: (usize, usize),
}

fn schmidt_of(v: &UnitVector) -> Result<SchmidtDecomposition> {
    schmidt_bipartite(v, 2, v.dim() / 2)
}

fn max_overlap(a: &[DVector<C64>], b: &[DVector<C64>]) -> f64 {
    let mut m: f64 = 0.0;
    for x in a {
        for y in b {
            m = m.max(x.dotc(y).norm());
        }
    }
    m
}

fn fix_block_phase(block: &mut nalgebra::DMatrix<C64>) {
    let mut best = C64::new(0.0, 0.0);
    for z in block.iter() {
        if z.norm() > best.norm() + 1e-12 {
            best = *z;
        }
    }
    if best.norm() > 0.0 {
        let phase = best.conj() / re(best.norm());
        *block *= phase;
    }
}

fn unitary_for_source(family: &[UnitVector], source: usize) -> Result<(ComplexMatrix, usize)> {
    let b = family[0].dim() / 2;
    if !b.is_multiple_of(2) {
        return Err(Error::DimensionMismatch(format!(
            "Bob's share of source {source} has odd dimension {b}; no qubit factor to extract"
        )));
    }
    let junk = b / 2;
    let mut rights: Vec<Vec<DVector<C64>>> = Vec::new();
    let mut lefts: Vec<Vec<DVector<C64>>> = Vec::new();
    for (term, v) in family.iter().enumerate() {
        let d = schmidt_of(v)?;
        if d.rank(SCHMIDT_RANK_TOL) < 2 {
            return Err(Error::SchmidtRankDeficient { source_index: source, term });
        }
        lefts.push(d.left.iter().map(|e| e.as_dvector().clone()).collect());
        rights.push(d.right.iter().map(|f| f.as_dvector().clone()).collect());
    }
    for s in 0..rights.len() {
        for l in 0..s {
            let overlap = max_overlap(&rights[s], &rights[l]);
            if overlap > SUPPORT_OVERLAP_TOL {
                return Err(Error::NonOrthogonalSupports { source_index: source, overlap });
            }
        }
    }
    let mut u = nalgebra::DMatrix::<C64>::zeros(b, b);
    for (s, (es, fs)) in lefts.iter().zip(&rights).enumerate() {
        let mut block = nalgebra::DMatrix::<C64>::zeros(b, b);
        for (e, f) in es.iter().zip(fs) {
            let mut target = DVector::<C64>::zeros(b);
            for q in 0..2 {
                target[q * junk + s] = e[q].conj();
            }
            block += &target * f.adjoint();
        }
        fix_block_phase(&mut block);
        u += block;
    }
    // remaining directions of H_B map onto the unused junk levels
    let chosen: Vec<DVector<C64>> = rights.iter().flatten().cloned().collect();
    let spare = crate::linalg::complete_basis(&chosen, b, b - chosen.len());
    let targets = (rights.len()..junk).flat_map(|s| (0..2).map(move |q| q * junk + s));
    for (src, t) in spare.iter().zip(targets) {
        let mut target = DVector::<C64>::zeros(b);
        target[t] = re(1.0);
        u += &target * src.adjoint();
    }
    let u = ComplexMatrix::wrap(u);
    if !u.is_unitary(STRUCTURAL_TOL) {
        return Err(Error::Numerical(format!("extracted U_{source} is not unitary")));
    }
    Ok((u, junk))
}

/// Block unitaries `U_i = ⊕_s U_{s,i}` from the Schmidt data of each term.
pub fn extract_local_unitaries(e: &SourceEnsemble) -> Result<LocalUnitaries> {
    let (u1, m1) = unitary_for_source(e.family(1), 1)?;
    let (u2, m2) = unitary_for_source(e.family(2), 2)?;
    Ok(LocalUnitaries { u1, u2, junk_dims: (m1, m2) })
}

/// Orthogonality diagnostics of the Bell-frame decomposition.
#[derive(Clone, Debug)]
pub struct SupportReport {
    /// `max |⟨g^{a'}_{ll'}|g^a_{ss'}⟩|` over `a ≠ a'` and all index pairs.
    pub g_overlap_defect: f64,
    /// `max |⟨f_{j,i,l}|f_{k,i,s}⟩|` over `s ≠ l`.
    pub local_support_defect: f64,
    /// `max ‖ω^a B₀³ |g^a⟩ - |g^a⟩‖`.
    pub g_eigen_residual: f64,
    /// Dimensions of Bob's local supports `V_{1,s}` and `V_{2,s'}`.
    pub block_dims: (Vec<usize>, Vec<usize>),
}

impl SupportReport {
    pub fn defect(&self) -> f64 {
        self.g_overlap_defect.max(self.local_support_defect)
    }

    /// Number of blocks `V_{ss'}` in `H_B = ⊕ V_{ss'}`.
    pub fn block_count(&self) -> usize {
        self.block_dims.0.len() * self.block_dims.1.len()
    }
}

/// `|f_j⟩ = √2 (⟨j| ⊗ 1)|ψ⟩` written through the Schmidt data: `√2 Σ_k λ_k ⟨j|e_k⟩ |f_k⟩`.
fn computational_frame(v: &UnitVector) -> Result<[DVector<C64>; 2]> {
    let d = schmidt_of(v)?;
    let b = v.dim() / 2;
    let mut out = [DVector::zeros(b), DVector::zeros(b)];
    for (j, slot) in out.iter_mut().enumerate() {
        for ((lambda, e), f) in d.coefficients.iter().zip(&d.left).zip(&d.right) {
            *slot += f.as_dvector() * (e.amplitudes()[j] * re(lambda * std::f64::consts::SQRT_2));
        }
    }
    Ok(out)
}

fn numerical_rank(vectors: &[DVector<C64>]) -> usize {
    let m = nalgebra::DMatrix::from_columns(vectors);
    m.singular_values().iter().filter(|&&s| s > SCHMIDT_RANK_TOL).count()
}

/// `g^a_{ss'}` for the four Bell outcomes.
fn g_vectors(f1: &[DVector<C64>; 2], f2: &[DVector<C64>; 2]) -> [DVector<C64>; 4] {
    let s = re(std::f64::consts::FRAC_1_SQRT_2);
    let p00 = f1[0].kronecker(&f2[0]);
    let p11 = f1[1].kronecker(&f2[1]);
    let p01 = f1[0].kronecker(&f2[1]);
    let p10 = f1[1].kronecker(&f2[0]);
    [(&p00 + &p11) * s, (&p00 - &p11) * s, (&p01 + &p10) * s, (&p01 - &p10) * s]
}

pub fn support_orthogonality_check(e: &SourceEnsemble, bob: &Povm) -> Result<SupportReport> {
    let frames1 = e.source1.iter().map(computational_frame).collect::<Result<Vec<_>>>()?;
    let frames2 = e.source2.iter().map(computational_frame).collect::<Result<Vec<_>>>()?;
    let (b1, b2) = e.bob_dims();
    if bob.dim() != b1 * b2 {
        return Err(Error::DimensionMismatch("Bob's POVM does not match the ensemble".into()));
    }
    let b0 = observable_from_povm(bob, 1)?;
    let b0_cubed = b0.pow(3);

    let mut local_support_defect: f64 = 0.0;
    for frames in [&frames1, &frames2] {
        for s in 0..frames.len() {
            for l in 0..s {
                local_support_defect = local_support_defect.max(max_overlap(&frames[s], &frames[l]));
            }
        }
    }

    let mut gs = Vec::new();
    let mut g_eigen_residual: f64 = 0.0;
    for f1 in &frames1 {
        for f2 in &frames2 {
            let g = g_vectors(f1, f2);
            for (a, ga) in g.iter().enumerate() {
                let lhs = b0_cubed.apply(ga) * omega_pow(a as i64);
                g_eigen_residual = g_eigen_residual.max((lhs - ga).norm());
            }
            gs.push(g);
        }
    }
    let mut g_overlap_defect: f64 = 0.0;
    for gi in &gs {
        for gj in &gs {
            for (a, x) in gi.iter().enumerate() {
                for (a2, y) in gj.iter().enumerate() {
                    if a != a2 {
                        g_overlap_defect = g_overlap_defect.max(y.dotc(x).norm());
                    }
                }
            }
        }
    }
    let block_dims = (
        frames1.iter().map(|f| numerical_rank(f)).collect(),
        frames2.iter().map(|f| numerical_rank(f)).collect(),
    );
    Ok(SupportReport { g_overlap_defect, local_support_defect, g_eigen_residual, block_dims })
}

/// `max ‖A₀^k ⊗ B̄^{4-k} |ψ¹_s⟩|ψ²_{s'}⟩ - |ψ¹_s⟩|ψ²_{s'}⟩‖` with `B̄` the
/// compression of `B₀` to the support of `Tr_A ψ¹_s ⊗ Tr_A ψ²_{s'}`.
pub fn block_relation_residual(e: &SourceEnsemble, bob: &Povm) -> Result<f64> {
    let a0 = trusted_observable();
    let b0 = observable_from_povm(bob, 1)?;
    let mut worst: f64 = 0.0;
    for p1 in &e.source1 {
        for p2 in &e.source2 {
            let shape1 = SubsystemShape::new(vec![2, p1.dim() / 2], vec!["A", "B"])?;
            let shape2 = SubsystemShape::new(vec![2, p2.dim() / 2], vec!["A", "B"])?;
            let r1 = crate::linalg::reduced_state(p1.as_dvector(), &shape1, &["B"])?;
            let r2 = crate::linalg::reduced_state(p2.as_dvector(), &shape2, &["B"])?;
            let support = support_projector(&kron(&r1, &r2), RANK_TOL)?;
            let bar = &(&support * &b0) * &support;
            let psi = arrange_product_vector(p1.as_dvector(), p2.as_dvector());
            for k in 0..OUTCOMES {
                let op = kron(&a0.component(1).pow(k as u32), &bar.pow((OUTCOMES - k) as u32));
                worst = worst.max((op.apply(&psi) - &psi).norm());
            }
        }
    }
    Ok(worst)
}

/// `‖(R ⊗ Q)|φ+⟩ - (R Qᵀ ⊗ 1)|φ+⟩‖` for the maximally entangled state of local dimension `R.rows()`.
pub fn transpose_identity_residual(r: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let d = r.rows();
    let mut phi = DVector::<C64>::zeros(d * d);
    for k in 0..d {
        phi[k * d + k] = re(1.0 / (d as f64).sqrt());
    }
    let lhs = kron(r, q).apply(&phi);
    let rhs = kron(&(r * &q.transpose()), &ComplexMatrix::identity(d)).apply(&phi);
    (lhs - rhs).norm()
}

/// Everything the extraction establishes about a strategy.
#[derive(Clone, Debug)]
pub struct ExtractionReport {
    pub witness: f64,
    /// Bob's observable is unitary on the support of `ρ_B` within the structural tolerance.
    pub projective: bool,
    pub projective_defect: f64,
    pub full_rank: bool,
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    pub junk_dims: (usize, usize),
    /// Fidelity of the extracted `(A1, A2, B1', B2')` state with `|φ+⟩|φ+⟩`.
    pub state_fidelity: f64,
    /// `‖((U₁⊗U₂) B₀ (U₁⊗U₂)† - A₀ ⊗ 1) Π‖_F` on the support Π of Bob's transformed state.
    pub measurement_defect: f64,
    pub support: SupportReport,
    pub block_relation_residual: f64,
    /// `‖ρ' - |φ+φ+⟩⟨φ+φ+| ⊗ ρ_junk‖_F`.
    pub product_form_defect: f64,
    /// Bob's auxiliary state on `(B1'', B2'')`.
    pub junk_state: ComplexMatrix,
    pub transpose_identity_residual: f64,
}

fn reference_state() -> DVector<C64> {
    let phi = bell_basis()[0].as_dvector().clone();
    arrange_product_vector(&phi, &phi)
}

fn build_report(rho: &ComplexMatrix, ensemble: &SourceEnsemble, bob: &Povm, witness: f64) -> Result<ExtractionReport> {
    let (b1, b2) = ensemble.bob_dims();
    let shape = SubsystemShape::new(vec![2, 2, b1, b2], vec!["A1", "A2", "B1", "B2"])?;
    let rho_b = partial_trace(rho, &shape, &["B1", "B2"])?;
    let full_rank = rho_b.min_eigenvalue() >= RANK_TOL;
    let support_b = support_projector(&rho_b, RANK_TOL)?;
    let b0 = observable_from_povm(bob, 1)?;
    let projective_defect = projective_defect_on_support(&b0, &support_b);

    let local = extract_local_unitaries(ensemble)?;
    let support = support_orthogonality_check(ensemble, bob)?;
    let block_relation_residual = block_relation_residual(ensemble, bob)?;
    let (m1, m2) = local.junk_dims;

    let ub = kron(&local.u1, &local.u2);
    let w = kron(&ComplexMatrix::identity(4), &ub);
    let transformed = &(&w * rho) * &w.adjoint();
    let ext_shape = SubsystemShape::new(vec![2, 2, 2, m1, 2, m2], vec!["A1", "A2", "B1'", "B1''", "B2'", "B2''"])?;
    let core = partial_trace(&transformed, &ext_shape, &["A1", "A2", "B1'", "B2'"])?;
    let target = UnitVector::from_dvector(reference_state())?.projector();
    let state_fidelity = fidelity(&core, &target)?;
    let junk_state = partial_trace(&transformed, &ext_shape, &["B1''", "B2''"])?;
    // target ⊗ junk, reordered from (A1, A2, B1', B2', B1'', B2'')
    let product = permute_operator(&kron(&target, &junk_state), &[2, 2, 2, 2, m1, m2], &[0, 1, 2, 4, 3, 5])?;
    let product_form_defect = (&transformed - &product).frobenius_norm();

    let b0_t = &(&ub * &b0) * &ub.adjoint();
    let a0 = trusted_observable().component(1).clone();
    let reference = permute_operator(&kron(&a0, &ComplexMatrix::identity(m1 * m2)), &[2, 2, m1, m2], &[0, 2, 1, 3])?;
    let support_t = &(&ub * &support_b) * &ub.adjoint();
    let measurement_defect = (&(&b0_t - &reference) * &support_t).frobenius_norm();

    let mut rng = ChaCha8Rng::seed_from_u64(0x7a5e);
    let r = crate::random::unitary(&mut rng, 4);
    let q = &crate::random::unitary(&mut rng, 4) * &ComplexMatrix::diagonal(&[re(0.3), c(1.0, 0.5), re(2.0), c(0.0, -1.0)]);
    let transpose_identity_residual = transpose_identity_residual(&r, &q);
    if transpose_identity_residual > 1e-10 {
        return Err(Error::Numerical(format!(
            "transposition identity violated by {transpose_identity_residual:e}"
        )));
    }

    Ok(ExtractionReport {
        witness,
        projective: projective_defect <= STRUCTURAL_TOL,
        projective_defect,
        full_rank,
        u1: local.u1,
        u2: local.u2,
        junk_dims: local.junk_dims,
        state_fidelity,
        measurement_defect,
        support,
        block_relation_residual,
        product_form_defect,
        junk_state,
        transpose_identity_residual,
    })
}

/// Runs the extraction without checking the maximal-violation premise.
pub fn extraction_report(s: &Strategy) -> Result<ExtractionReport> {
    let ensemble = eigendecompose_separable(s.source1(), s.source2())?;
    let w = witness_value(&crate::scenario::correlations(s));
    build_report(&s.arranged_state(), &ensemble, s.bob(), w)
}

/// Self-test of a strategy; refuses unless `W ≥ 1 - tol`.
pub fn verify_selftest(s: &Strategy, tol: f64) -> Result<ExtractionReport> {
    let w = crate::witness::witness_expectation_form(s)?.value;
    if w < 1.0 - tol {
        return Err(Error::PremiseUnmet { witness: w, tol });
    }
    extraction_report(s)
}

/// Self-test for a general (possibly classically correlated) separable ensemble.
pub fn verify_selftest_ensemble(e: &SourceEnsemble, bob: &Povm, tol: f64) -> Result<ExtractionReport> {
    let rho = e.density();
    let w = witness_value(&joint_correlations(&rho, &Povm::bell(), bob)?);
    if w < 1.0 - tol {
        return Err(Error::PremiseUnmet { witness: w, tol });
    }
    build_report(&rho, e, bob, w)
}
