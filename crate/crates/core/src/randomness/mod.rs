//! Randomness of Bob's outcomes against an eavesdropper holding a
//! purification.
//!
//! Eve holds the `E` part of `|ψ_ABE⟩` and measures a 4-outcome POVM `{E_e}`
//! to guess Bob's result. A strategy is admissible only if it reproduces the
//! observed table exactly (within the consistency tolerance). The guessing
//! probability is `G = Σ_b ⟨ψ| 1_A ⊗ N_b ⊗ E_b |ψ⟩` and `H_min = -log₂ G`.

mod adversary;

pub use adversary::{optimize_eve, Component, EveConfig, EveOptimization, EveTraceEntry};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{apply_local, eig_hermitian, re, reduced_state, ComplexMatrix, SubsystemShape, UnitVector, C64};
use crate::scenario::{bell_basis, correlations, CorrelationTable, Povm, Strategy, OUTCOMES};
use crate::witness::witness_value;

/// Max-entry deviation allowed between Eve's table and the observed one.
pub const CONSISTENCY_TOL: f64 = 1e-8;
/// Default tolerance on `1 - W` before a certificate is issued.
pub const PREMISE_TOL: f64 = 1e-7;

/// `Σ_k √λ_k |v_k⟩|k⟩` on `H ⊗ C^rank`, with `(λ_k, v_k)` the nonzero
/// spectrum of `rho` (eigenvalues below `1e-12` dropped).
pub fn purify(rho: &ComplexMatrix) -> Result<UnitVector> {
    if !rho.is_square() || !rho.is_density(1e-9) {
        return Err(Error::InvalidState("purification needs a density operator".into()));
    }
    let (vals, vecs) = eig_hermitian(rho)?;
    let kept: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > 1e-12).collect();
    let rank = kept.len();
    let dim = rho.rows();
    let mut psi = DVector::<C64>::zeros(dim * rank);
    for (slot, &k) in kept.iter().enumerate() {
        let amp = vals[k].sqrt();
        for i in 0..dim {
            psi[i * rank + slot] += vecs[(i, k)] * re(amp);
        }
    }
    UnitVector::normalized(psi)
}

/// Eve's side of a purified strategy: `|ψ⟩` on (A1, A2, B, E), the honest
/// parties' measurements and Eve's guessing POVM.
#[derive(Clone, Debug)]
pub struct EveStrategy {
    state: UnitVector,
    shape: SubsystemShape,
    alice: Povm,
    bob: Povm,
    eve: Povm,
}

impl EveStrategy {
    pub fn new(state: UnitVector, bob_dim: usize, eve_dim: usize, alice: Povm, bob: Povm, eve: Povm) -> Result<Self> {
        let shape = SubsystemShape::new(vec![2, 2, bob_dim, eve_dim], vec!["A1", "A2", "B", "E"])?;
        if state.dim() != shape.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "joint state has dimension {}, shape needs {}",
                state.dim(),
                shape.total_dim()
            )));
        }
        if alice.dim() != 4 || alice.outcome_count() != OUTCOMES {
            return Err(Error::DimensionMismatch("Alice's POVM must have 4 outcomes on A1A2".into()));
        }
        if bob.dim() != bob_dim || bob.outcome_count() != OUTCOMES {
            return Err(Error::DimensionMismatch("Bob's POVM does not match his system".into()));
        }
        if eve.dim() != eve_dim || eve.outcome_count() != OUTCOMES {
            return Err(Error::DimensionMismatch("Eve's POVM must have 4 outcomes on E".into()));
        }
        Ok(Self { state, shape, alice, bob, eve })
    }

    /// Purifies a strategy and pads the purifier to `eve_dim` levels.
    pub fn from_strategy(s: &Strategy, eve_dim: usize, eve: Povm) -> Result<Self> {
        let psi = purify(&s.arranged_state())?;
        let rank = psi.dim() / s.arranged_state().rows();
        if rank > eve_dim {
            return Err(Error::DimensionMismatch(format!("purifier needs {rank} levels, Eve has {eve_dim}")));
        }
        let ab = s.arranged_state().rows();
        let mut padded = DVector::<C64>::zeros(ab * eve_dim);
        for i in 0..ab {
            for k in 0..rank {
                padded[i * eve_dim + k] = psi.amplitudes()[i * rank + k];
            }
        }
        let bob_dim = s.bob().dim();
        Self::new(UnitVector::from_dvector(padded)?, bob_dim, eve_dim, s.alice().clone(), s.bob().clone(), eve)
    }

    /// Replaces Eve's POVM.
    pub fn with_eve_povm(&self, eve: Povm) -> Result<Self> {
        Self::new(self.state.clone(), self.bob_dim(), self.eve_dim(), self.alice.clone(), self.bob.clone(), eve)
    }

    /// Applies a unitary on Eve's register.
    pub fn rotate_eve(&self, u: &ComplexMatrix) -> Result<Self> {
        let v = apply_local(u, &self.shape, &["E"], self.state.as_dvector())?;
        let state = UnitVector::from_dvector(v)?;
        Self::new(state, self.bob_dim(), self.eve_dim(), self.alice.clone(), self.bob.clone(), self.eve.clone())
    }

    pub fn state(&self) -> &UnitVector {
        &self.state
    }

    pub fn shape(&self) -> &SubsystemShape {
        &self.shape
    }

    pub fn alice(&self) -> &Povm {
        &self.alice
    }

    pub fn bob(&self) -> &Povm {
        &self.bob
    }

    pub fn eve(&self) -> &Povm {
        &self.eve
    }

    pub fn bob_dim(&self) -> usize {
        self.shape.dims()[2]
    }

    pub fn eve_dim(&self) -> usize {
        self.shape.dims()[3]
    }

    /// `ρ_AB` with Eve traced out.
    pub fn honest_state(&self) -> Result<ComplexMatrix> {
        reduced_state(self.state.as_dvector(), &self.shape, &["A1", "A2", "B"])
    }

    /// `p(a, b) = ⟨ψ| M_a ⊗ N_b ⊗ 1_E |ψ⟩`.
    pub fn table(&self) -> Result<[[f64; OUTCOMES]; OUTCOMES]> {
        let psi = self.state.as_dvector();
        let mut p = [[0.0; OUTCOMES]; OUTCOMES];
        for b in 0..OUTCOMES {
            let nb = apply_local(self.bob.element(b), &self.shape, &["B"], psi)?;
            for (a, row) in p.iter_mut().enumerate() {
                let m = apply_local(self.alice.element(a), &self.shape, &["A1", "A2"], &nb)?;
                row[b] = psi.dotc(&m).re;
            }
        }
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConsistencyReport {
    pub passed: bool,
    pub deviation: f64,
}

/// Recomputes the honest table from Eve's state and compares entrywise.
pub fn eve_consistency_check(e: &EveStrategy, target: &CorrelationTable, tol: f64) -> Result<ConsistencyReport> {
    let p = e.table()?;
    let mut deviation: f64 = 0.0;
    for a in 0..OUTCOMES {
        for b in 0..OUTCOMES {
            deviation = deviation.max((p[a][b] - target.get(a, b)).abs());
        }
    }
    Ok(ConsistencyReport { passed: deviation <= tol, deviation })
}

/// `Σ_b ⟨ψ| 1_A ⊗ N_b ⊗ E_b |ψ⟩` for a strategy that reproduces `target`.
pub fn guessing_probability(e: &EveStrategy, target: &CorrelationTable, tol: f64) -> Result<f64> {
    let check = eve_consistency_check(e, target, tol)?;
    if !check.passed {
        return Err(Error::ConsistencyFailure { deviation: check.deviation });
    }
    raw_guessing_probability(e)
}

pub(crate) fn raw_guessing_probability(e: &EveStrategy) -> Result<f64> {
    let psi = e.state.as_dvector();
    let mut g = C64::new(0.0, 0.0);
    for b in 0..OUTCOMES {
        let v = apply_local(e.bob.element(b), &e.shape, &["B"], psi)?;
        let v = apply_local(e.eve.element(b), &e.shape, &["E"], &v)?;
        g += psi.dotc(&v);
    }
    if g.im.abs() > 1e-10 {
        return Err(Error::Numerical(format!("guessing probability has imaginary part {:e}", g.im)));
    }
    Ok(g.re.clamp(0.0, 1.0))
}

/// `-log₂ g` for `0 < g ≤ 1`.
pub fn min_entropy(g: f64) -> Result<f64> {
    if !(g > 0.0 && g <= 1.0) {
        return Err(Error::OutOfRange { field: "g".into(), message: format!("{g} is not in (0, 1]") });
    }
    Ok(-g.log2())
}

/// Eve entangles the two sources: each round Alice receives `|φ_b⟩`, Bob a
/// classical `b` that he announces, and Eve a copy of `b`.
#[derive(Clone, Debug)]
pub struct AttackDemo {
    pub strategy: EveStrategy,
    pub table: CorrelationTable,
    pub witness: f64,
    pub guessing_probability: f64,
}

pub fn entangled_source_attack() -> Result<AttackDemo> {
    let bell = bell_basis();
    let mut psi = DVector::<C64>::zeros(4 * OUTCOMES * OUTCOMES);
    for (b, phi) in bell.iter().enumerate() {
        for i in 0..4 {
            psi[(i * OUTCOMES + b) * OUTCOMES + b] += phi.amplitudes()[i] * re(0.5);
        }
    }
    let basis: Vec<UnitVector> = (0..OUTCOMES).map(|b| UnitVector::basis(OUTCOMES, b)).collect();
    let bob = Povm::from_basis(&basis)?;
    let eve = Povm::from_basis(&basis)?;
    let strategy = EveStrategy::new(UnitVector::from_dvector(psi)?, OUTCOMES, OUTCOMES, Povm::bell(), bob, eve)?;
    let table = CorrelationTable::new(strategy.table()?)?;
    let witness = witness_value(&table);
    let guessing_probability = guessing_probability(&strategy, &table, CONSISTENCY_TOL)?;
    Ok(AttackDemo { strategy, table, witness, guessing_probability })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificationStatus {
    Certified2Bits,
    PremiseUnmet,
    HeuristicBound,
}

impl CertificationStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Certified2Bits => "certified-2-bits",
            Self::PremiseUnmet => "premise-unmet",
            Self::HeuristicBound => "heuristic-bound",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CertificationResult {
    pub guessing_probability: f64,
    pub min_entropy_bits: f64,
    pub witness: f64,
    pub status: CertificationStatus,
    pub certified: bool,
    pub caveats: Vec<String>,
}

/// Options for [`certify`].
#[derive(Clone, Debug, PartialEq)]
pub struct CertifyConfig {
    pub premise_tol: f64,
    pub eve: EveConfig,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self { premise_tol: PREMISE_TOL, eve: EveConfig::default() }
    }
}

const SOURCE_CAVEAT: &str = "sources assumed independent up to classical correlations; entangled sources break the bound";

/// Certificate at maximal violation, heuristic adversary bound otherwise.
pub fn certify(s: &Strategy, config: &CertifyConfig, seed: u64) -> Result<CertificationResult> {
    let table = correlations(s);
    let witness = witness_value(&table);
    if witness >= 1.0 - config.premise_tol {
        return Ok(CertificationResult {
            guessing_probability: 0.25,
            min_entropy_bits: 2.0,
            witness,
            status: CertificationStatus::Certified2Bits,
            certified: true,
            caveats: vec![SOURCE_CAVEAT.to_string(), "exact maximal violation required; no robustness bound".to_string()],
        });
    }
    let caveats = vec![
        SOURCE_CAVEAT.to_string(),
        format!(
            "heuristic lower bound on G from a search over Eve dimension {}; not a certificate",
            config.eve.eve_dim
        ),
    ];
    match optimize_eve(&table, &config.eve, seed) {
        Ok(opt) => Ok(CertificationResult {
            guessing_probability: opt.guessing_probability,
            min_entropy_bits: min_entropy(opt.guessing_probability)?,
            witness,
            status: CertificationStatus::HeuristicBound,
            certified: false,
            caveats,
        }),
        Err(Error::Infeasible { .. }) => Ok(CertificationResult {
            guessing_probability: 1.0,
            min_entropy_bits: 0.0,
            witness,
            status: CertificationStatus::PremiseUnmet,
            certified: false,
            caveats,
        }),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{kron, partial_trace};
    use crate::scenario::isotropic_source;

    fn trace_out_purifier(psi: &UnitVector, dim: usize) -> ComplexMatrix {
        let shape = SubsystemShape::new(vec![dim, psi.dim() / dim], vec!["S", "P"]).unwrap();
        reduced_state(psi.as_dvector(), &shape, &["S"]).unwrap()
    }

    #[test]
    fn purify_examples() {
        let phi = bell_basis()[0].projector();
        let psi = purify(&phi).unwrap();
        assert_eq!(psi.dim(), 4);
        assert!((psi.inner(&bell_basis()[0]).norm() - 1.0).abs() < 1e-12);

        let mixed = ComplexMatrix::identity(2).scale_real(0.5);
        let psi = purify(&mixed).unwrap();
        assert_eq!(psi.dim(), 4);
        let shape = SubsystemShape::new(vec![2, 2], vec!["S", "P"]).unwrap();
        let r = reduced_state(psi.as_dvector(), &shape, &["P"]).unwrap();
        assert!(r.max_abs_diff(&mixed) < 1e-12);

        let iso = isotropic_source(0.8).unwrap();
        let psi = purify(&iso).unwrap();
        assert_eq!(psi.dim(), 16);
        assert!(trace_out_purifier(&psi, 4).max_abs_diff(&iso) < 1e-10);
    }

    #[test]
    fn min_entropy_examples() {
        assert!((min_entropy(0.25).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(min_entropy(1.0).unwrap(), 0.0);
        assert!((min_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(min_entropy(0.0), Err(Error::OutOfRange { .. })));
        assert!(min_entropy(1.5).is_err());
    }

    #[test]
    fn ideal_eve_guesses_one_quarter() {
        let table = CorrelationTable::ideal();
        // Eve always guesses outcome 2
        let mut elements = vec![ComplexMatrix::zeros(1, 1); 4];
        elements[2] = ComplexMatrix::identity(1);
        let e = EveStrategy::from_strategy(&Strategy::ideal(), 1, Povm::new(elements).unwrap()).unwrap();
        assert!(eve_consistency_check(&e, &table, CONSISTENCY_TOL).unwrap().passed);
        assert!((guessing_probability(&e, &table, CONSISTENCY_TOL).unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn tampered_bob_fails_consistency() {
        let e = EveStrategy::from_strategy(&Strategy::ideal(), 1, Povm::new(vec![ComplexMatrix::identity(1), ComplexMatrix::zeros(1, 1), ComplexMatrix::zeros(1, 1), ComplexMatrix::zeros(1, 1)]).unwrap()).unwrap();
        let basis: Vec<UnitVector> = (0..4).map(|b| UnitVector::basis(4, b)).collect();
        let tampered = EveStrategy::new(
            e.state().clone(),
            4,
            1,
            Povm::bell(),
            Povm::from_basis(&basis).unwrap(),
            e.eve().clone(),
        )
        .unwrap();
        let check = eve_consistency_check(&tampered, &CorrelationTable::ideal(), CONSISTENCY_TOL).unwrap();
        assert!(!check.passed);
        assert!(matches!(
            guessing_probability(&tampered, &CorrelationTable::ideal(), CONSISTENCY_TOL),
            Err(Error::ConsistencyFailure { .. })
        ));
    }

    #[test]
    fn attack_is_invisible_and_perfect() {
        let demo = entangled_source_attack().unwrap();
        assert!(demo.table.max_abs_diff(&CorrelationTable::ideal()) < 1e-12);
        assert!((demo.witness - 1.0).abs() < 1e-12);
        assert!((demo.guessing_probability - 1.0).abs() < 1e-12);
        assert!(eve_consistency_check(&demo.strategy, &CorrelationTable::ideal(), 1e-12).unwrap().passed);
        // the honest state is not a product across the two sources
        let rho = demo.strategy.honest_state().unwrap();
        let shape = SubsystemShape::new(vec![2, 2, 4], vec!["A1", "A2", "B"]).unwrap();
        let a = partial_trace(&rho, &shape, &["A1", "A2"]).unwrap();
        assert!(a.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-12);
        assert!(rho.max_abs_diff(&kron(&a, &partial_trace(&rho, &shape, &["B"]).unwrap())) > 0.1);
    }

    #[test]
    fn ideal_certificate() {
        let r = certify(&Strategy::ideal(), &CertifyConfig::default(), 1).unwrap();
        assert_eq!(r.status, CertificationStatus::Certified2Bits);
        assert!(r.certified);
        assert!((r.min_entropy_bits - 2.0).abs() < 1e-10);
        assert!((r.guessing_probability - 0.25).abs() < 1e-10);
        assert!(!r.caveats.is_empty());
    }
}
