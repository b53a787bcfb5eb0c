// Copyright 2026 The covtrade Developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Python bindings: scenarios, seeds, frontier sweeps, SDP solves and Monte Carlo checks.
//!
//! Matrices cross the boundary as nested lists of Python `complex`.

use covtrade::matrix::{ComplexMatrix, HermitianOperator, TensorShape, C64};
use covtrade::scenarios::LinearConstraint;
use covtrade::tradeoff::{self, TradeoffPoint, Verification};
use covtrade::{Error, Family, HalfInt, Scenario, SdpProblem, SolverOptions};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NoConvergence { .. } | Error::NumericalFailure(_) => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Rows = Vec<Vec<C64>>;

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.rows())
        .map(|r| (0..m.cols()).map(|c| m[(r, c)]).collect())
        .collect()
}

fn from_rows(rows: Rows) -> PyResult<ComplexMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("ragged matrix rows"));
    }
    ComplexMatrix::from_vec(n, cols, rows.into_iter().flatten().collect()).map_err(py_err)
}

fn hermitian(rows: Rows) -> PyResult<HermitianOperator> {
    HermitianOperator::flat(from_rows(rows)?).map_err(py_err)
}

fn options(gap_tol: f64, feas_tol: f64, max_iter: usize) -> SolverOptions {
    SolverOptions {
        gap_tol,
        feas_tol,
        max_iter,
    }
}

fn verification_dict<'py>(py: Python<'py>, v: &Verification) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("n_samples", v.n_samples)?;
    d.set_item("f_estimate", v.f_estimate)?;
    d.set_item("g_estimate", v.g_estimate)?;
    d.set_item("f_stderr", v.f_stderr)?;
    d.set_item("g_stderr", v.g_stderr)?;
    Ok(d)
}

/// Seed operator `R0` of a covariant instrument.
#[pyclass(name = "Seed", module = "covtrade_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySeed {
    inner: HermitianOperator,
}

#[pymethods]
impl PySeed {
    fn matrix(&self) -> Rows {
        to_rows(self.inner.matrix())
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn trace(&self) -> f64 {
        self.inner.trace()
    }

    fn min_eigenvalue(&self) -> PyResult<f64> {
        self.inner.min_eigenvalue().map_err(py_err)
    }

    /// Kraus operators (each `out × in`) and the discarded eigenvalue mass.
    #[pyo3(signature = (rank_tol = tradeoff::KRAUS_RANK_TOL))]
    fn kraus(&self, rank_tol: f64) -> PyResult<(Vec<Rows>, f64)> {
        let k = tradeoff::extract_kraus(&self.inner, rank_tol).map_err(py_err)?;
        Ok((k.operators.iter().map(to_rows).collect(), k.discarded_mass))
    }
}

/// One frontier point.
#[pyclass(name = "Point", module = "covtrade_py", frozen)]
struct PyPoint {
    inner: TradeoffPoint,
}

#[pymethods]
impl PyPoint {
    #[getter]
    fn g(&self) -> f64 {
        self.inner.g
    }

    #[getter]
    fn f(&self) -> f64 {
        self.inner.f
    }

    /// Scalarization weight (`inf` for the G-max endpoint), `None` for constrained points.
    #[getter]
    fn lam(&self) -> Option<f64> {
        self.inner.lambda
    }

    #[getter]
    fn status(&self) -> &'static str {
        self.inner.diagnostics.status.as_str()
    }

    #[getter]
    fn duality_gap(&self) -> f64 {
        self.inner.diagnostics.duality_gap
    }

    #[getter]
    fn primal_residual(&self) -> f64 {
        self.inner.diagnostics.primal_residual
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.diagnostics.iterations
    }

    #[getter]
    fn seed(&self) -> Option<PySeed> {
        self.inner.seed.clone().map(|inner| PySeed { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Point(g={:.10}, f={:.10}, lam={:?}, status={})",
            self.inner.g,
            self.inner.f,
            self.inner.lambda,
            self.status()
        )
    }
}

/// Fidelity operators, constraints and group action of one state family.
#[pyclass(name = "Scenario", module = "covtrade_py", frozen)]
struct PyScenario {
    inner: Scenario,
}

fn points(v: Vec<TradeoffPoint>) -> Vec<PyPoint> {
    v.into_iter().map(|inner| PyPoint { inner }).collect()
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn pure(d: usize) -> PyResult<Self> {
        Self::build(Family::Pure { d })
    }

    #[staticmethod]
    fn maxent(d: usize) -> PyResult<Self> {
        Self::build(Family::Maxent { d })
    }

    /// `j` as a string ("3/2") or a number (1.5).
    #[staticmethod]
    fn spin(j: &Bound<'_, PyAny>) -> PyResult<Self> {
        let text = match j.extract::<String>() {
            Ok(s) => s,
            Err(_) => j.extract::<f64>()?.to_string(),
        };
        let j: HalfInt = text.parse().map_err(py_err)?;
        Self::build(Family::Spin {
            j: j.as_spin().map_err(py_err)?,
        })
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.inner.family.name()
    }

    #[getter]
    fn param(&self) -> String {
        self.inner.family.param()
    }

    #[getter]
    fn in_dim(&self) -> usize {
        self.inner.in_dim
    }

    #[getter]
    fn out_dim(&self) -> usize {
        self.inner.out_dim
    }

    fn r_f(&self) -> Rows {
        to_rows(self.inner.r_f.matrix())
    }

    fn r_g(&self) -> Rows {
        to_rows(self.inner.r_g.matrix())
    }

    /// Constraints as `(operator, value)` pairs.
    fn constraints(&self) -> Vec<(Rows, f64)> {
        self.inner
            .constraints
            .iter()
            .map(|c| (to_rows(c.operator.matrix()), c.value))
            .collect()
    }

    fn identity_seed(&self) -> PySeed {
        PySeed {
            inner: self.inner.identity_seed(),
        }
    }

    fn measure_prepare_seed(&self) -> PyResult<PySeed> {
        Ok(PySeed {
            inner: self.inner.measure_prepare_seed().map_err(py_err)?,
        })
    }

    /// Seed of the covariantized discrete instrument with guesses `U_r ψ0`.
    fn covariant_seed(
        &self,
        kraus_by_outcome: Vec<Vec<Rows>>,
        guess_unitaries: Vec<Rows>,
    ) -> PyResult<PySeed> {
        let (kraus, guesses) = discrete_args(kraus_by_outcome, guess_unitaries)?;
        let seed = covtrade::covariant_seed(&kraus, &guesses).map_err(py_err)?;
        Ok(PySeed {
            inner: seed
                .with_shape(self.inner.seed_shape().clone())
                .map_err(py_err)?,
        })
    }

    fn operation_fidelity(&self, seed: &PySeed) -> PyResult<f64> {
        self.inner.operation_fidelity(&seed.inner).map_err(py_err)
    }

    fn estimation_fidelity(&self, seed: &PySeed) -> PyResult<f64> {
        self.inner.estimation_fidelity(&seed.inner).map_err(py_err)
    }

    #[pyo3(signature = (gap_tol = 1e-8, feas_tol = 1e-9, max_iter = 200))]
    fn max_g(
        &self,
        py: Python<'_>,
        gap_tol: f64,
        feas_tol: f64,
        max_iter: usize,
    ) -> PyResult<PyPoint> {
        let opts = options(gap_tol, feas_tol, max_iter);
        let inner = py
            .detach(|| tradeoff::max_g(&self.inner, &opts))
            .map_err(py_err)?;
        Ok(PyPoint { inner })
    }

    /// Frontier by scalarization; `float("inf")` requests the G-max endpoint.
    #[pyo3(signature = (lambdas, gap_tol = 1e-8, feas_tol = 1e-9, max_iter = 200))]
    fn curve_lagrangian(
        &self,
        py: Python<'_>,
        lambdas: Vec<f64>,
        gap_tol: f64,
        feas_tol: f64,
        max_iter: usize,
    ) -> PyResult<Vec<PyPoint>> {
        let opts = options(gap_tol, feas_tol, max_iter);
        let v = py
            .detach(|| tradeoff::curve_lagrangian(&self.inner, &lambdas, &opts))
            .map_err(py_err)?;
        Ok(points(v))
    }

    #[pyo3(signature = (g_values, gap_tol = 1e-8, feas_tol = 1e-9, max_iter = 200))]
    fn curve_constrained(
        &self,
        py: Python<'_>,
        g_values: Vec<f64>,
        gap_tol: f64,
        feas_tol: f64,
        max_iter: usize,
    ) -> PyResult<Vec<PyPoint>> {
        let opts = options(gap_tol, feas_tol, max_iter);
        let v = py
            .detach(|| tradeoff::curve_constrained(&self.inner, &g_values, &opts))
            .map_err(py_err)?;
        Ok(points(v))
    }

    /// Monte Carlo F and G of the covariant instrument generated by `seed`.
    #[pyo3(signature = (seed, n = 100_000, rng_seed = 0))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        seed: &PySeed,
        n: usize,
        rng_seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let v = py
            .detach(|| tradeoff::verify_fidelities(&self.inner, &seed.inner, n, rng_seed))
            .map_err(py_err)?;
        verification_dict(py, &v)
    }

    /// Monte Carlo F and G of a discrete instrument with guess states `U_r ψ0`.
    #[pyo3(signature = (kraus_by_outcome, guess_unitaries, n = 100_000, rng_seed = 0))]
    fn discrete_fidelities<'py>(
        &self,
        py: Python<'py>,
        kraus_by_outcome: Vec<Vec<Rows>>,
        guess_unitaries: Vec<Rows>,
        n: usize,
        rng_seed: u64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let (kraus, guesses) = discrete_args(kraus_by_outcome, guess_unitaries)?;
        let v = py
            .detach(|| tradeoff::discrete_fidelities(&self.inner, &kraus, &guesses, n, rng_seed))
            .map_err(py_err)?;
        verification_dict(py, &v)
    }

    fn __repr__(&self) -> String {
        format!("Scenario({})", self.inner.family)
    }
}

impl PyScenario {
    fn build(f: Family) -> PyResult<Self> {
        Ok(Self {
            inner: f.build().map_err(py_err)?,
        })
    }
}

type DiscreteArgs = (Vec<Vec<ComplexMatrix>>, Vec<ComplexMatrix>);

fn discrete_args(
    kraus_by_outcome: Vec<Vec<Rows>>,
    guess_unitaries: Vec<Rows>,
) -> PyResult<DiscreteArgs> {
    let kraus = kraus_by_outcome
        .into_iter()
        .map(|ops| ops.into_iter().map(from_rows).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    let guesses = guess_unitaries
        .into_iter()
        .map(from_rows)
        .collect::<PyResult<Vec<_>>>()?;
    Ok((kraus, guesses))
}

/// `max Tr[C X]` subject to `Tr[A_i X] = b_i`, `X ⪰ 0`, for Hermitian `C` and `A_i`.
#[pyfunction]
#[pyo3(signature = (objective, constraints, gap_tol = 1e-8, feas_tol = 1e-9, max_iter = 200))]
fn solve_sdp<'py>(
    py: Python<'py>,
    objective: Rows,
    constraints: Vec<(Rows, f64)>,
    gap_tol: f64,
    feas_tol: f64,
    max_iter: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let c = hermitian(objective)?;
    let cons = constraints
        .into_iter()
        .map(|(a, b)| {
            let a = hermitian(a)?
                .with_shape(TensorShape::flat(c.dim()))
                .map_err(py_err)?;
            LinearConstraint::new(a, b).map_err(py_err)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let problem = SdpProblem::new(c, cons).map_err(py_err)?;
    let opts = options(gap_tol, feas_tol, max_iter);
    let sol = py
        .detach(|| covtrade::solve_with(&problem, &opts))
        .map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("x", to_rows(sol.x.matrix()))?;
    d.set_item("value", sol.value)?;
    d.set_item("dual_value", sol.dual_value)?;
    d.set_item("duality_gap", sol.duality_gap)?;
    d.set_item("primal_residual", sol.primal_residual)?;
    d.set_item("min_eigenvalue", sol.min_eigenvalue)?;
    d.set_item("iterations", sol.iterations)?;
    d.set_item("status", sol.status.as_str())?;
    Ok(d)
}

/// `λ = 0`, `points - 1` log-spaced weights up to `lambda_max`, then `inf`.
#[pyfunction]
#[pyo3(signature = (points = 25, lambda_max = 1e3))]
fn default_lambda_grid(points: usize, lambda_max: f64) -> PyResult<Vec<f64>> {
    tradeoff::default_lambda_grid(points, lambda_max).map_err(py_err)
}

#[pymodule]
fn covtrade_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PySeed>()?;
    m.add_class::<PyPoint>()?;
    m.add_function(wrap_pyfunction!(solve_sdp, m)?)?;
    m.add_function(wrap_pyfunction!(default_lambda_grid, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = ComplexMatrix::from_fn(2, 3, |r, c| C64::new(r as f64, c as f64));
        assert_eq!(from_rows(to_rows(&m)).unwrap().max_abs_diff(&m), 0.0);
        assert!(from_rows(vec![vec![C64::new(1.0, 0.0)], vec![]]).is_err());
    }

    #[test]
    fn module_exposes_scenarios() {
        Python::initialize();
        Python::attach(|py| {
            let m = PyModule::new(py, "covtrade_py").unwrap();
            covtrade_py(&m).unwrap();
            let s = m
                .getattr("Scenario")
                .unwrap()
                .call_method1("pure", (2,))
                .unwrap();
            let top = s.call_method0("max_g").unwrap();
            let g: f64 = top.getattr("g").unwrap().extract().unwrap();
            assert!((g - 2.0 / 3.0).abs() < 1e-6);
            let spin = m
                .getattr("Scenario")
                .unwrap()
                .call_method1("spin", ("1/2",))
                .unwrap();
            assert_eq!(
                spin.getattr("param").unwrap().extract::<String>().unwrap(),
                "j=1/2"
            );
            assert!(m
                .getattr("Scenario")
                .unwrap()
                .call_method1("spin", (0.3,))
                .is_err());
        });
    }
}
