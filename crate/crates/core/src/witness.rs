//! The swap-steering witness `W = Σ_a p(a, a)`, its Fourier form
//! `W = ¼ Σ_k ⟨A₀^k ⊗ B₀^{(4-k)}⟩`, the maximal-violation residuals and a
//! numerical estimate of the local-hidden-state bound.
//!
//! LHS model used for the bound: the two sources are independent classical
//! devices that hand Alice fixed qubit states `σ_λ1`, `τ_λ2` and hand Bob
//! the hidden variables, from which he computes his outcome. Alice measures
//! the Bell basis on `σ ⊗ τ`. The witness is linear in the source
//! distributions and Bob's response, so its maximum sits at a single
//! deterministic point: one pure product state and one outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{c, kron, ComplexMatrix, UnitVector, C64};
use crate::scenario::{bell_basis, CorrelationTable, Observable, Strategy, OUTCOMES};

/// `p(0,0) + p(1,1) + p(2,2) + p(3,3)`.
pub fn witness_value(t: &CorrelationTable) -> f64 {
    (0..OUTCOMES).map(|a| t.get(a, a)).sum()
}

#[derive(Clone, Debug)]
pub struct WitnessResult {
    pub value: f64,
    /// `⟨A^{(k)} ⊗ B^{(4-k)}⟩` for `k = 0..3`.
    pub per_term: [C64; OUTCOMES],
    /// `‖(A^{(k)} ⊗ B^{(4-k)}) ρ - ρ‖_F` for `k = 0..3`.
    pub residuals: [f64; OUTCOMES],
}

/// The operators `A^{(k)} ⊗ B^{((4-k) mod 4)}` for `k = 0..3`.
fn term_operators(s: &Strategy) -> Result<Vec<ComplexMatrix>> {
    let alice = Observable::from_povm(s.alice())?;
    let bob = Observable::from_povm(s.bob())?;
    Ok((0..OUTCOMES)
        .map(|k| kron(alice.component(k), bob.component((OUTCOMES - k) % OUTCOMES)))
        .collect())
}

/// Evaluates the witness from operators and the arranged state.
pub fn witness_expectation_form(s: &Strategy) -> Result<WitnessResult> {
    let rho = s.arranged_state();
    let mut per_term = [c(0.0, 0.0); OUTCOMES];
    let mut residuals = [0.0; OUTCOMES];
    for (k, op) in term_operators(s)?.iter().enumerate() {
        per_term[k] = op.trace_with(&rho);
        residuals[k] = (&(op * &rho) - &rho).frobenius_norm();
    }
    let value = per_term.iter().map(|z| z.re).sum::<f64>() / OUTCOMES as f64;
    Ok(WitnessResult { value, per_term, residuals })
}

/// Frobenius defects of `(A₀^k ⊗ B₀^{(4-k)}) ρ = ρ`; all vanish exactly when
/// every per-term expectation equals one.
pub fn max_violation_residuals(s: &Strategy) -> Result<[f64; OUTCOMES]> {
    Ok(witness_expectation_form(s)?.residuals)
}

/// Settings for the LHS-bound search.
#[derive(Clone, Debug, PartialEq)]
pub struct LhsConfig {
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for LhsConfig {
    fn default() -> Self {
        Self { restarts: 32, max_iterations: 2000 }
    }
}

/// Bloch angles `(θ, φ)` of `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    pub theta: f64,
    pub phi: f64,
}

impl BlochAngles {
    pub fn state(&self) -> UnitVector {
        let (s, co) = (self.theta / 2.0).sin_cos();
        UnitVector::new(vec![c(co, 0.0), C64::from_polar(s, self.phi)]).expect("unit by construction")
    }
}

/// Optimal deterministic LHS point.
#[derive(Clone, Debug)]
pub struct LhsArgmax {
    pub first: BlochAngles,
    pub second: BlochAngles,
    /// Bob's announced outcome.
    pub outcome: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub restart: usize,
    pub iteration: usize,
    pub value: f64,
}

#[derive(Clone, Debug)]
pub struct LhsBoundEstimate {
    pub beta: f64,
    pub argmax: LhsArgmax,
    pub trace: Vec<TraceEntry>,
}

/// `|⟨φ_b|σ ⊗ τ⟩|²`: witness value of the deterministic point where Alice
/// holds `σ ⊗ τ` and Bob announces `b`.
pub fn lhs_point_value(first: &UnitVector, second: &UnitVector, outcome: usize) -> f64 {
    let joint = first.kron(second);
    bell_basis()[outcome].inner(&joint).norm_sqr()
}

/// Bob's best response to Alice holding `σ ⊗ τ`.
pub fn best_response(first: &UnitVector, second: &UnitVector) -> (usize, f64) {
    (0..OUTCOMES)
        .map(|b| (b, lhs_point_value(first, second, b)))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc })
}

fn objective(x: &[f64; 4]) -> f64 {
    let a = BlochAngles { theta: x[0], phi: x[1] }.state();
    let b = BlochAngles { theta: x[2], phi: x[3] }.state();
    best_response(&a, &b).1
}

struct RestartOutcome {
    x: [f64; 4],
    value: f64,
    trace: Vec<TraceEntry>,
}

/// Gradient ascent with backtracking; a step is taken only if it improves.
fn ascend(restart: usize, start: [f64; 4], max_iterations: usize) -> RestartOutcome {
    const H: f64 = 1e-6;
    let mut x = start;
    let mut f = objective(&x);
    let mut step = 1.0;
    let mut trace = vec![TraceEntry { restart, iteration: 0, value: f }];
    for iteration in 1..=max_iterations {
        let mut grad = [0.0; 4];
        for i in 0..4 {
            let mut up = x;
            let mut down = x;
            up[i] += H;
            down[i] -= H;
            grad[i] = (objective(&up) - objective(&down)) / (2.0 * H);
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut t = step * 2.0;
        let mut accepted = None;
        while t > 1e-14 {
            let mut cand = x;
            for i in 0..4 {
                cand[i] += t * grad[i];
            }
            let fc = objective(&cand);
            if fc > f {
                accepted = Some((cand, fc));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, fc)) => {
                let gain = fc - f;
                x = cand;
                f = fc;
                step = t;
                trace.push(TraceEntry { restart, iteration, value: f });
                if gain < 1e-16 {
                    break;
                }
            }
            None => break,
        }
    }
    RestartOutcome { x, value: f, trace }
}

/// Multi-restart local ascent over the four Bloch angles of Alice's product
/// state, with Bob's outcome maximized exactly. Deterministic in `seed`;
/// restarts run in parallel and are merged in restart order.
pub fn lhs_bound(config: &LhsConfig, seed: u64) -> Result<LhsBoundEstimate> {
    if config.restarts == 0 {
        return Err(Error::InvalidConfig("lhs-bound needs at least one restart".into()));
    }
    if config.max_iterations == 0 {
        return Err(Error::InvalidConfig("lhs-bound needs at least one iteration".into()));
    }
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let start = [
                rng.random_range(0.0..std::f64::consts::PI),
                rng.random_range(0.0..std::f64::consts::TAU),
                rng.random_range(0.0..std::f64::consts::PI),
                rng.random_range(0.0..std::f64::consts::TAU),
            ];
            ascend(r, start, config.max_iterations)
        })
        .collect();
    let best = outcomes
        .iter()
        .fold(&outcomes[0], |acc, o| if o.value > acc.value { o } else { acc });
    let first = BlochAngles { theta: best.x[0], phi: best.x[1] };
    let second = BlochAngles { theta: best.x[2], phi: best.x[3] };
    let (outcome, beta) = best_response(&first.state(), &second.state());
    Ok(LhsBoundEstimate {
        beta,
        argmax: LhsArgmax { first, second, outcome },
        trace: outcomes.into_iter().flat_map(|o| o.trace).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::correlations;

    #[test]
    fn witness_value_examples() {
        assert!((witness_value(&CorrelationTable::ideal()) - 1.0).abs() < 1e-15);
        assert!((witness_value(&CorrelationTable::uniform()) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn ideal_terms_are_all_one() {
        let r = witness_expectation_form(&Strategy::ideal()).unwrap();
        for z in r.per_term {
            assert!((z - c(1.0, 0.0)).norm() < 1e-12);
        }
        assert!(r.residuals.iter().all(|&x| x < 1e-12));
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_sources_give_one_half() {
        // direct oracle: |⟨φ±|00⟩|² = 1/2 for Alice, Bob's Bell outcome on |00⟩
        // matches with the same weights, so W = 2 · (1/2 · 1/2) = 1/2
        let r = witness_expectation_form(&Strategy::product()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
        assert!((witness_value(&correlations(&Strategy::product())) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn maximally_mixed_sources_give_one_quarter() {
        let r = witness_expectation_form(&Strategy::isotropic(0.0).unwrap()).unwrap();
        assert!((r.value - 0.25).abs() < 1e-12);
    }

    #[test]
    fn residuals_positive_under_noise() {
        let res = max_violation_residuals(&Strategy::isotropic(0.8).unwrap()).unwrap();
        assert!(res[0] < 1e-14);
        assert!(res[1..].iter().all(|&x| x > 1e-3));
    }

    #[test]
    fn fixed_product_point() {
        let zero = UnitVector::basis(2, 0);
        let (b, v) = best_response(&zero, &zero);
        assert_eq!(b, 0);
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ascent_trace_is_monotone() {
        let est = lhs_bound(&LhsConfig { restarts: 4, max_iterations: 200 }, 11).unwrap();
        for w in est.trace.windows(2) {
            if w[0].restart == w[1].restart {
                assert!(w[1].value >= w[0].value);
            }
        }
        // single restart from an arbitrary start still ends at or above its start
        let bad = lhs_bound(&LhsConfig { restarts: 1, max_iterations: 1 }, 0xdead).unwrap();
        assert!(bad.beta >= bad.trace[0].value);
    }

    #[test]
    fn rejects_zero_restarts() {
        assert!(matches!(
            lhs_bound(&LhsConfig { restarts: 0, max_iterations: 10 }, 0),
            Err(Error::InvalidConfig(_))
        ));
    }
}
