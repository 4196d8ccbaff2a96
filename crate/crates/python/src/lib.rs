//! Python bindings: strategies, the witness, self-testing, certification
//! and the CLI pipeline.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use swapsteer_core::config::{parse_config, OutputFormat};
use swapsteer_core::randomness::{self, CertifyConfig, EveConfig};
use swapsteer_core::report::render_report;
use swapsteer_core::run::{run, Command};
use swapsteer_core::scenario::correlations;
use swapsteer_core::selftest::{self, PREMISE_TOL};
use swapsteer_core::strategy_file::load_strategy;
use swapsteer_core::witness::{self, LhsConfig};
use swapsteer_core::{ComplexMatrix, Error, Povm, Strategy, C64};

create_exception!(swapsteer, ConfigError, PyValueError);
create_exception!(swapsteer, AssumptionViolation, PyRuntimeError);
create_exception!(swapsteer, NumericalFailure, PyRuntimeError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.exit_code() {
        2 => ConfigError::new_err(msg),
        3 => AssumptionViolation::new_err(msg),
        _ => NumericalFailure::new_err(msg),
    }
}

fn matrix(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(ConfigError::new_err("ragged matrix"));
    }
    ComplexMatrix::new(n, m, rows.into_iter().flatten().collect()).map_err(to_py)
}

fn nested(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    let d = m.as_dmatrix();
    (0..d.nrows()).map(|i| (0..d.ncols()).map(|j| d[(i, j)]).collect()).collect()
}

#[pyclass(name = "Strategy", frozen)]
struct PyStrategy {
    inner: Strategy,
}

#[pymethods]
impl PyStrategy {
    #[staticmethod]
    fn ideal() -> Self {
        Self { inner: Strategy::ideal() }
    }

    #[staticmethod]
    fn isotropic(v: f64) -> PyResult<Self> {
        Ok(Self { inner: Strategy::isotropic(v).map_err(to_py)? })
    }

    #[staticmethod]
    fn product() -> Self {
        Self { inner: Strategy::product() }
    }

    /// Sources as 4×4 density matrices on (A_i, B_i); Bob's POVM as four
    /// matrices on (B1, B2). Alice measures the Bell basis.
    #[staticmethod]
    fn custom(source1: Vec<Vec<C64>>, source2: Vec<Vec<C64>>, bob: Vec<Vec<Vec<C64>>>) -> PyResult<Self> {
        let elements = bob.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?;
        let povm = Povm::new(elements).map_err(to_py)?;
        let inner = Strategy::with_trusted_alice(matrix(source1)?, matrix(source2)?, povm).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Parses the text format accepted by `strategy=custom file=...`.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: load_strategy(text).map_err(to_py)? })
    }

    /// Applies `V1` on B1 and `V2` on B2 and conjugates Bob's POVM to match.
    fn scrambled(&self, v1: Vec<Vec<C64>>, v2: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(Self { inner: self.inner.scrambled(&matrix(v1)?, &matrix(v2)?).map_err(to_py)? })
    }

    fn table(&self) -> Vec<Vec<f64>> {
        correlations(&self.inner).rows().iter().map(|r| r.to_vec()).collect()
    }

    fn witness(&self) -> f64 {
        witness::witness_value(&correlations(&self.inner))
    }

    /// `⟨A^k ⊗ B^{4-k}⟩` for k = 0..3.
    fn terms(&self) -> PyResult<Vec<C64>> {
        Ok(witness::witness_expectation_form(&self.inner).map_err(to_py)?.per_term.to_vec())
    }

    fn residuals(&self) -> PyResult<Vec<f64>> {
        Ok(witness::max_violation_residuals(&self.inner).map_err(to_py)?.to_vec())
    }

    #[pyo3(signature = (tol = PREMISE_TOL))]
    fn selftest<'py>(&self, py: Python<'py>, tol: f64) -> PyResult<Bound<'py, PyDict>> {
        let r = selftest::verify_selftest(&self.inner, tol).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("witness", r.witness)?;
        d.set_item("state_fidelity", r.state_fidelity)?;
        d.set_item("measurement_defect", r.measurement_defect)?;
        d.set_item("projective", r.projective)?;
        d.set_item("full_rank", r.full_rank)?;
        d.set_item("junk_dims", r.junk_dims)?;
        d.set_item("u1", nested(&r.u1))?;
        d.set_item("u2", nested(&r.u2))?;
        d.set_item("junk_state", nested(&r.junk_state))?;
        d.set_item("support_defect", r.support.defect())?;
        Ok(d)
    }

    #[pyo3(signature = (seed = 0, restarts = 8, iterations = 200, eve_dim = 16))]
    fn certify<'py>(
        &self,
        py: Python<'py>,
        seed: u64,
        restarts: usize,
        iterations: usize,
        eve_dim: usize,
    ) -> PyResult<Bound<'py, PyDict>> {
        let cfg = CertifyConfig {
            eve: EveConfig { eve_dim, restarts, iterations, ..EveConfig::default() },
            ..CertifyConfig::default()
        };
        let r = randomness::certify(&self.inner, &cfg, seed).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("guessing_probability", r.guessing_probability)?;
        d.set_item("min_entropy_bits", r.min_entropy_bits)?;
        d.set_item("witness", r.witness)?;
        d.set_item("status", r.status.as_str())?;
        d.set_item("certified", r.certified)?;
        d.set_item("caveats", r.caveats)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Strategy(W={:.12})", self.witness())
    }
}

#[pyfunction]
#[pyo3(signature = (restarts = 32, iterations = 2000, seed = 0))]
fn lhs_bound(py: Python<'_>, restarts: usize, iterations: usize, seed: u64) -> PyResult<Bound<'_, PyDict>> {
    let est = witness::lhs_bound(&LhsConfig { restarts, max_iterations: iterations }, seed).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("beta", est.beta)?;
    d.set_item("outcome", est.argmax.outcome)?;
    d.set_item("first", (est.argmax.first.theta, est.argmax.first.phi))?;
    d.set_item("second", (est.argmax.second.theta, est.argmax.second.phi))?;
    Ok(d)
}

#[pyfunction]
fn attack_demo(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let demo = randomness::entangled_source_attack().map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("witness", demo.witness)?;
    d.set_item("guessing_probability", demo.guessing_probability)?;
    d.set_item("table", demo.table.rows().iter().map(|r| r.to_vec()).collect::<Vec<_>>())?;
    d.set_item("eve_dim", demo.strategy.eve_dim())?;
    Ok(d)
}

#[pyfunction]
fn min_entropy(g: f64) -> PyResult<f64> {
    randomness::min_entropy(g).map_err(to_py)
}

/// Runs a CLI command on configuration text and returns the rendered report.
#[pyfunction]
#[pyo3(signature = (command, config, seed = None, format = "machine"))]
fn run_command(command: &str, config: &str, seed: Option<u64>, format: &str) -> PyResult<String> {
    let cmd: Command = command.parse().map_err(to_py)?;
    let mut c = parse_config(config).map_err(to_py)?;
    if let Some(s) = seed {
        c.seed = s;
    }
    let fmt = match format {
        "machine" => OutputFormat::Machine,
        "human" => OutputFormat::Human,
        other => return Err(ConfigError::new_err(format!("unknown format `{other}`"))),
    };
    let report = run(cmd, &c).map_err(to_py)?;
    render_report(&report, fmt).map_err(to_py)
}

#[pymodule]
fn swapsteer(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStrategy>()?;
    m.add_function(wrap_pyfunction!(lhs_bound, m)?)?;
    m.add_function(wrap_pyfunction!(attack_demo, m)?)?;
    m.add_function(wrap_pyfunction!(min_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    let py = m.py();
    m.add("ConfigError", py.get_type::<ConfigError>())?;
    m.add("AssumptionViolation", py.get_type::<AssumptionViolation>())?;
    m.add("NumericalFailure", py.get_type::<NumericalFailure>())?;
    m.add("__version__", swapsteer_core::VERSION)?;
    Ok(())
}
