//! Heuristic search for Eve's best guessing strategy when the sources are
//! independent up to classical correlations.
//!
//! A shared classical variable `j` (known to Eve) selects, per round, pure
//! states `σ_j` on (A1, B1') and `τ_j` on (A2, B2'), a projective measurement
//! for Bob on (B1', B2') and Eve's guess `e_j`. Each such component gives a
//! table `p_j` and a guess score `g_j = Σ_a p_j(a, e_j)`. Eve's optimum over
//! mixtures is the linear program `max Σ w_j g_j` subject to `Σ w_j p_j = t`,
//! grown by column generation: the dual prices `y` define the reduced score
//! `Σ_ab p(a,b) (δ_{b,e} - y_ab)`, which a block ascent over
//! (σ, τ, e, outcome labels, Bob's basis) tries to make positive.
//!
//! Bob's register is enlarged by a copy of `j`, so the assembled strategy is
//! an ordinary purified one and Eve's POVM (measure `j`, announce `e_j`) is
//! optimal for it.

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{raw_guessing_probability, EveStrategy, CONSISTENCY_TOL};
use crate::error::{Error, Result};
use crate::linalg::{eig_hermitian, permute_operator, polar_unitary, re, ComplexMatrix, UnitVector, C64};
use crate::scenario::{arrange_product_vector, bell_basis, CorrelationTable, Povm, OUTCOMES};

const BIG_M: f64 = 10.0;
const MAX_ROUNDS: usize = 40;
const REDUCED_COST_TOL: f64 = 1e-9;
const WEIGHT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct EveConfig {
    /// Eve's register dimension; bounds the number of mixture components.
    pub eve_dim: usize,
    /// Independent ascent starts per pricing round.
    pub restarts: usize,
    /// Block-ascent sweeps per start.
    pub iterations: usize,
    pub consistency_tol: f64,
}

impl Default for EveConfig {
    fn default() -> Self {
        Self { eve_dim: 16, restarts: 8, iterations: 200, consistency_tol: CONSISTENCY_TOL }
    }
}

/// One classical branch of Eve's strategy.
#[derive(Clone, Debug)]
pub struct Component {
    /// Pure state on (A1, B1').
    pub sigma: UnitVector,
    /// Pure state on (A2, B2').
    pub tau: UnitVector,
    /// Columns are Bob's measurement basis on (B1', B2').
    pub basis: ComplexMatrix,
    /// Basis vector `k` announces outcome `labels[k]`.
    pub labels: [usize; OUTCOMES],
    pub guess: usize,
}

type Table = [[f64; OUTCOMES]; OUTCOMES];

impl Component {
    fn joint_matrix(&self) -> DMatrix<C64> {
        let psi = arrange_product_vector(self.sigma.as_dvector(), self.tau.as_dvector());
        DMatrix::from_row_slice(4, 4, psi.as_slice())
    }

    /// `p(a, b) = ⟨Ψ| φ_a ⊗ N_b |Ψ⟩`.
    pub fn table(&self) -> Table {
        let q = bell_matrix().adjoint() * self.joint_matrix() * self.basis.as_dmatrix().conjugate();
        let mut p = [[0.0; OUTCOMES]; OUTCOMES];
        for (a, row) in p.iter_mut().enumerate() {
            for k in 0..OUTCOMES {
                row[self.labels[k]] += q[(a, k)].norm_sqr();
            }
        }
        p
    }

    pub fn guess_score(&self) -> f64 {
        let p = self.table();
        (0..OUTCOMES).map(|a| p[a][self.guess]).sum()
    }

    pub fn bob_povm(&self) -> Vec<ComplexMatrix> {
        let mut n = vec![DMatrix::<C64>::zeros(4, 4); OUTCOMES];
        for k in 0..OUTCOMES {
            let col = self.basis.column(k);
            n[self.labels[k]] += col * col.adjoint();
        }
        n.into_iter().map(ComplexMatrix::wrap).collect()
    }

    fn priced(&self, y: &Table) -> f64 {
        let p = self.table();
        let mut v = 0.0;
        for a in 0..OUTCOMES {
            for b in 0..OUTCOMES {
                v += p[a][b] * (if b == self.guess { 1.0 } else { 0.0 } - y[a][b]);
            }
        }
        v
    }
}

fn bell_matrix() -> DMatrix<C64> {
    let cols: Vec<DVector<C64>> = bell_basis().iter().map(|v| v.as_dvector().clone()).collect();
    DMatrix::from_columns(&cols)
}

fn weights_matrix(y: &Table, guess: usize) -> Table {
    let mut c = [[0.0; OUTCOMES]; OUTCOMES];
    for a in 0..OUTCOMES {
        for b in 0..OUTCOMES {
            c[a][b] = if b == guess { 1.0 } else { 0.0 } - y[a][b];
        }
    }
    c
}

/// `C_b = Σ_a c_ab |φ_a⟩⟨φ_a|`.
fn alice_operators(c: &Table) -> Vec<DMatrix<C64>> {
    let bell = bell_basis();
    (0..OUTCOMES)
        .map(|b| {
            let mut m = DMatrix::<C64>::zeros(4, 4);
            for (a, phi) in bell.iter().enumerate() {
                let v = phi.as_dvector();
                m += v * v.adjoint() * re(c[a][b]);
            }
            m
        })
        .collect()
}

fn top_eigenvector(h: DMatrix<C64>) -> UnitVector {
    let sym = ComplexMatrix::wrap((&h + h.adjoint()) * re(0.5));
    let (_, vecs) = eig_hermitian(&sym).expect("symmetrized");
    UnitVector::normalized(vecs.column(0).into_owned()).expect("eigenvector")
}

/// Objective operator on (A1, B1', A2, B2').
fn objective_operator(comp: &Component, c: &Table) -> DMatrix<C64> {
    let ops = alice_operators(c);
    let povm = comp.bob_povm();
    let mut o = DMatrix::<C64>::zeros(16, 16);
    for b in 0..OUTCOMES {
        o += ops[b].kronecker(povm[b].as_dmatrix());
    }
    permute_operator(&ComplexMatrix::wrap(o), &[2, 2, 2, 2], &[0, 2, 1, 3])
        .expect("fixed shape")
        .as_dmatrix()
        .clone()
}

fn contract_second(o: &DMatrix<C64>, tau: &DVector<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| {
        let mut s = C64::new(0.0, 0.0);
        for k in 0..4 {
            for l in 0..4 {
                s += tau[k].conj() * o[(i * 4 + k, j * 4 + l)] * tau[l];
            }
        }
        s
    })
}

fn contract_first(o: &DMatrix<C64>, sigma: &DVector<C64>) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |k, l| {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                s += sigma[i].conj() * o[(i * 4 + k, j * 4 + l)] * sigma[j];
            }
        }
        s
    })
}

/// `K_b = (M† C_b M)ᵀ`, so that the score is `Σ_b Tr(N_b K_b)`.
fn bob_operators(comp: &Component, c: &Table) -> Vec<DMatrix<C64>> {
    let m = comp.joint_matrix();
    alice_operators(c).iter().map(|cb| (m.adjoint() * cb * &m).transpose()).collect()
}

fn try_update(comp: &mut Component, value: &mut f64, y: &Table, candidate: Component) {
    let v = candidate.priced(y);
    if v >= *value {
        *comp = candidate;
        *value = v;
    }
}

fn sweep(comp: &mut Component, value: &mut f64, y: &Table) {
    let c = weights_matrix(y, comp.guess);
    let o = objective_operator(comp, &c);
    let mut cand = comp.clone();
    cand.sigma = top_eigenvector(contract_second(&o, comp.tau.as_dvector()));
    try_update(comp, value, y, cand);

    let o = objective_operator(comp, &c);
    let mut cand = comp.clone();
    cand.tau = top_eigenvector(contract_first(&o, comp.sigma.as_dvector()));
    try_update(comp, value, y, cand);

    for e in 0..OUTCOMES {
        let mut cand = comp.clone();
        cand.guess = e;
        if cand.priced(y) > *value {
            try_update(comp, value, y, cand);
        }
    }

    let c = weights_matrix(y, comp.guess);
    let ks = bob_operators(comp, &c);
    let mut cand = comp.clone();
    for k in 0..OUTCOMES {
        let n = comp.basis.column(k);
        let scores: Vec<f64> = ks.iter().map(|kb| (n.adjoint() * kb * n)[(0, 0)].re).collect();
        let mut best = cand.labels[k];
        for (b, &s) in scores.iter().enumerate() {
            if s > scores[best] + 1e-15 {
                best = b;
            }
        }
        cand.labels[k] = best;
    }
    try_update(comp, value, y, cand);

    // majorize-minimize step on Bob's basis
    let ks = bob_operators(comp, &c);
    let shift = ks
        .iter()
        .map(|k| ComplexMatrix::wrap((k + k.adjoint()) * re(0.5)).min_eigenvalue())
        .fold(0.0_f64, |acc, m| acc.max(-m));
    let mut grad = DMatrix::<C64>::zeros(4, 4);
    for k in 0..OUTCOMES {
        let n = comp.basis.column(k).into_owned();
        let kb = &ks[comp.labels[k]] + DMatrix::<C64>::identity(4, 4) * re(shift);
        grad.set_column(k, &(kb * n));
    }
    let mut cand = comp.clone();
    cand.basis = ComplexMatrix::wrap(polar_unitary(&grad));
    try_update(comp, value, y, cand);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EveTraceEntry {
    pub round: usize,
    pub restart: usize,
    pub sweep: usize,
    pub value: f64,
}

fn ascend(start: Component, y: &Table, sweeps: usize, round: usize, restart: usize) -> (Component, f64, Vec<EveTraceEntry>) {
    let mut comp = start;
    let mut value = comp.priced(y);
    let mut trace = vec![EveTraceEntry { round, restart, sweep: 0, value }];
    for s in 1..=sweeps {
        let before = value;
        sweep(&mut comp, &mut value, y);
        trace.push(EveTraceEntry { round, restart, sweep: s, value });
        if value - before < 1e-13 {
            break;
        }
    }
    (comp, value, trace)
}

fn random_component<R: Rng + ?Sized>(rng: &mut R) -> Component {
    Component {
        sigma: crate::random::unit_vector(rng, 4),
        tau: crate::random::unit_vector(rng, 4),
        basis: crate::random::unitary(rng, 4),
        labels: [0, 1, 2, 3],
        guess: rng.random_range(0..OUTCOMES),
    }
}

/// Bell pairs measured in the Bell basis, and classical product schedules
/// where Bob always announces a fixed outcome.
fn structured_components() -> Vec<Component> {
    let bell = bell_basis();
    let bell_u = ComplexMatrix::wrap(bell_matrix());
    let mut out = Vec::new();
    for s in &bell {
        for t in &bell {
            for e in 0..OUTCOMES {
                out.push(Component {
                    sigma: s.clone(),
                    tau: t.clone(),
                    basis: bell_u.clone(),
                    labels: [0, 1, 2, 3],
                    guess: e,
                });
            }
        }
    }
    for x in 0..2 {
        for z in 0..2 {
            for b in 0..OUTCOMES {
                out.push(Component {
                    sigma: UnitVector::basis(4, 2 * x),
                    tau: UnitVector::basis(4, 2 * z),
                    basis: ComplexMatrix::identity(4),
                    labels: [b; OUTCOMES],
                    guess: b,
                });
            }
        }
    }
    out
}

struct Column {
    comp: Component,
    p: Table,
    g: f64,
}

impl Column {
    fn new(comp: Component) -> Self {
        let p = comp.table();
        let g = (0..OUTCOMES).map(|a| p[a][comp.guess]).sum();
        Self { comp, p, g }
    }
}

struct Master {
    weights: Vec<f64>,
    artificial: f64,
    objective: f64,
}

fn lp_error(e: microlp::Error) -> Error {
    Error::Numerical(format!("linear program: {e}"))
}

fn solve_master(columns: &[Column], t: &CorrelationTable) -> Result<Master> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<Variable> = columns.iter().map(|c| lp.add_var(c.g, (0.0, f64::INFINITY))).collect();
    let mut slack = Vec::new();
    for a in 0..OUTCOMES {
        for b in 0..OUTCOMES {
            let up = lp.add_var(-BIG_M, (0.0, f64::INFINITY));
            let down = lp.add_var(-BIG_M, (0.0, f64::INFINITY));
            let mut expr = LinearExpr::empty();
            for (col, &v) in columns.iter().zip(&w) {
                if col.p[a][b] != 0.0 {
                    expr.add(v, col.p[a][b]);
                }
            }
            expr.add(up, 1.0);
            expr.add(down, -1.0);
            lp.add_constraint(expr, ComparisonOp::Eq, t.get(a, b));
            slack.push(up);
            slack.push(down);
        }
    }
    let sol = lp.solve().map_err(lp_error)?.into_solution().map_err(|_| Error::Numerical("master LP interrupted".into()))?;
    Ok(Master {
        weights: w.iter().map(|&v| sol.var_value(v).max(0.0)).collect(),
        artificial: slack.iter().map(|&v| sol.var_value(v)).sum(),
        objective: sol.objective(),
    })
}

/// Prices of the table entries: `min ⟨t, y⟩` s.t. `⟨p_j, y⟩ ≥ g_j`, `|y| ≤ M`.
fn solve_dual(columns: &[Column], t: &CorrelationTable) -> Result<Table> {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let mut y = Vec::new();
    for a in 0..OUTCOMES {
        for b in 0..OUTCOMES {
            y.push(lp.add_var(t.get(a, b), (-BIG_M, BIG_M)));
        }
    }
    for col in columns {
        let mut expr = LinearExpr::empty();
        for a in 0..OUTCOMES {
            for b in 0..OUTCOMES {
                if col.p[a][b] != 0.0 {
                    expr.add(y[a * OUTCOMES + b], col.p[a][b]);
                }
            }
        }
        lp.add_constraint(expr, ComparisonOp::Ge, col.g);
    }
    let sol = lp.solve().map_err(lp_error)?.into_solution().map_err(|_| Error::Numerical("dual LP interrupted".into()))?;
    let mut out = [[0.0; OUTCOMES]; OUTCOMES];
    for a in 0..OUTCOMES {
        for b in 0..OUTCOMES {
            out[a][b] = sol.var_value(y[a * OUTCOMES + b]);
        }
    }
    Ok(out)
}

/// Result of [`optimize_eve`]. `guessing_probability` is achieved by the
/// returned strategy, so it is a lower bound on Eve's optimum; it is never an
/// upper bound.
#[derive(Clone, Debug)]
pub struct EveOptimization {
    pub strategy: EveStrategy,
    pub guessing_probability: f64,
    pub components: Vec<(f64, Component)>,
    /// LP value after each round; nondecreasing.
    pub master_objective: Vec<f64>,
    /// Pricing ascent values; nondecreasing within each (round, restart).
    pub trace: Vec<EveTraceEntry>,
    pub consistency_deviation: f64,
}

fn assemble(active: &[(f64, Component)], eve_dim: usize) -> Result<EveStrategy> {
    let k = active.len();
    let bob_dim = 4 * k;
    let mut psi = DVector::<C64>::zeros(4 * bob_dim * eve_dim);
    let mut bob = vec![DMatrix::<C64>::zeros(bob_dim, bob_dim); OUTCOMES];
    let mut eve = vec![DMatrix::<C64>::zeros(eve_dim, eve_dim); OUTCOMES];
    for (j, (w, comp)) in active.iter().enumerate() {
        let joint = arrange_product_vector(comp.sigma.as_dvector(), comp.tau.as_dvector());
        for ia in 0..4 {
            for jb in 0..4 {
                psi[(ia * bob_dim + jb * k + j) * eve_dim + j] = joint[ia * 4 + jb] * re(w.sqrt());
            }
        }
        let mut flag = DMatrix::<C64>::zeros(k, k);
        flag[(j, j)] = re(1.0);
        for (b, nb) in comp.bob_povm().iter().enumerate() {
            bob[b] += nb.as_dmatrix().kronecker(&flag);
        }
        eve[comp.guess][(j, j)] = re(1.0);
    }
    for j in k..eve_dim {
        eve[0][(j, j)] = re(1.0);
    }
    let wrap = |v: Vec<DMatrix<C64>>| Povm::new(v.into_iter().map(ComplexMatrix::wrap).collect());
    EveStrategy::new(UnitVector::normalized(psi)?, bob_dim, eve_dim, Povm::bell(), wrap(bob)?, wrap(eve)?)
}

/// Searches Eve strategies reproducing `target`; deterministic in `seed`.
pub fn optimize_eve(target: &CorrelationTable, config: &EveConfig, seed: u64) -> Result<EveOptimization> {
    if config.eve_dim == 0 || config.restarts == 0 || config.iterations == 0 {
        return Err(Error::InvalidConfig("eve_dim, restarts and iterations must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Column> = structured_components().into_iter().map(Column::new).collect();
    for _ in 0..config.restarts {
        columns.push(Column::new(random_component(&mut rng)));
    }
    let mut master_objective = Vec::new();
    let mut trace = Vec::new();
    let mut master = solve_master(&columns, target)?;
    master_objective.push(master.objective);
    for round in 0..MAX_ROUNDS {
        let y = solve_dual(&columns, target)?;
        let results: Vec<(Component, f64, Vec<EveTraceEntry>)> = (0..config.restarts)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((round * config.restarts + r + 1) as u64);
                ascend(random_component(&mut rng), &y, config.iterations, round, r)
            })
            .collect();
        let mut added = false;
        for (comp, value, t) in results {
            trace.extend(t);
            if value > REDUCED_COST_TOL {
                columns.push(Column::new(comp));
                added = true;
            }
        }
        if !added {
            break;
        }
        master = solve_master(&columns, target)?;
        master_objective.push(master.objective);
    }
    if master.artificial > config.consistency_tol {
        return Err(Error::Infeasible { residual: master.artificial });
    }
    let total: f64 = master.weights.iter().sum();
    let active: Vec<(f64, Component)> = master
        .weights
        .iter()
        .zip(&columns)
        .filter(|(w, _)| **w > WEIGHT_FLOOR)
        .map(|(w, c)| (w / total, c.comp.clone()))
        .collect();
    if active.len() > config.eve_dim {
        return Err(Error::Numerical(format!(
            "{} mixture components exceed Eve dimension {}",
            active.len(),
            config.eve_dim
        )));
    }
    let strategy = assemble(&active, config.eve_dim)?;
    let check = super::eve_consistency_check(&strategy, target, config.consistency_tol)?;
    if !check.passed {
        return Err(Error::ConsistencyFailure { deviation: check.deviation });
    }
    let guessing_probability = raw_guessing_probability(&strategy)?;
    Ok(EveOptimization {
        strategy,
        guessing_probability,
        components: active,
        master_objective,
        trace,
        consistency_deviation: check.deviation,
    })
}
