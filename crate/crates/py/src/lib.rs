//! Python module `painleve`: thin wrappers over `painleve_core`.
//!
//! Long solves release the GIL. Library errors map to `ValueError` (bad
//! input), `OSError` (files), `SolverError` (no convergence) and its subclass
//! `NonPhysicalError` (converged to a state failing a post-check).

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use painleve_core::gl::{self, DEFAULT_CHI};
use painleve_core::grid::{Field2D, Grid1D, Grid2D};
use painleve_core::ode::{solve_hastings_mcleod, HMProblem, DEFAULT_A, DEFAULT_B, DEFAULT_N};
use painleve_core::pde::{
    rescale_to_allen_cahn, solve_connecting, ConnectProblem, DEFAULT_N1, DEFAULT_N2, DEFAULT_X1, DEFAULT_X2MAX,
};
use painleve_core::special;
use painleve_core::{Error, SolverConfig};

create_exception!(painleve, SolverError, PyRuntimeError);
create_exception!(painleve, NonPhysicalError, SolverError);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::NonPhysical(_) => NonPhysicalError::new_err(msg),
        Error::NewtonDiverged { .. } | Error::Linalg(_) => SolverError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
        Error::InvalidGrid(_)
        | Error::GridMismatch
        | Error::OutOfDomain(..)
        | Error::InvalidConfig(_)
        | Error::Parse(_) => PyValueError::new_err(msg),
    }
}

fn solver_config(abs_tol: f64) -> PyResult<SolverConfig> {
    let cfg = SolverConfig::default().with_abs_tol(abs_tol);
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

/// A scalar field on a uniform `x1 × x2` grid.
#[pyclass(frozen, module = "painleve")]
pub struct Field {
    inner: Field2D,
}

#[pymethods]
impl Field {
    #[getter]
    fn x1(&self) -> Vec<f64> {
        self.inner.grid().axis1().nodes().collect()
    }

    #[getter]
    fn x2(&self) -> Vec<f64> {
        self.inner.grid().axis2().nodes().collect()
    }

    /// Values as one row per `x1` node.
    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        let n2 = self.inner.grid().n2();
        self.inner.values().chunks(n2).map(<[f64]>::to_vec).collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.grid().n1(), self.inner.grid().n2())
    }

    /// Bilinear interpolation; `odd=True` extends to `x2 < 0` by `u(x1, -x2) = -u(x1, x2)`.
    #[pyo3(signature = (x1, x2, odd = false))]
    fn sample(&self, x1: f64, x2: f64, odd: bool) -> PyResult<f64> {
        let v = if odd {
            self.inner.sample_odd(x1, x2)
        } else {
            self.inner.sample(x1, x2)
        };
        v.map_err(py_err)
    }

    fn sup_norm(&self) -> f64 {
        self.inner.sup_norm()
    }

    fn __repr__(&self) -> String {
        let (n1, n2) = self.shape();
        format!("Field(shape=({n1}, {n2}))")
    }
}

/// One minimizer of the ε-continuation with its diagnostics.
#[pyclass(frozen, get_all, module = "painleve")]
pub struct Minimizer {
    epsilon: f64,
    chi: f64,
    energy: f64,
    energy_identity_gap: f64,
    thomas_fermi_gap: Option<f64>,
    min_k_bound: f64,
    field: Py<Field>,
}

#[pyfunction]
fn airy_ai(x: f64) -> f64 {
    special::airy_ai(x)
}

#[pyfunction]
fn airy_ai_prime(x: f64) -> f64 {
    special::airy_ai_prime(x)
}

#[pyfunction]
fn heteroclinic(x: f64) -> f64 {
    special::heteroclinic(x)
}

/// Solve the one-dimensional problem on `[a, b]`; returns `(x, h)`.
#[pyfunction]
#[pyo3(signature = (a = DEFAULT_A, b = DEFAULT_B, n = DEFAULT_N, abs_tol = 1e-9))]
fn hastings_mcleod(py: Python<'_>, a: f64, b: f64, n: usize, abs_tol: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let cfg = solver_config(abs_tol)?;
    let grid = Grid1D::new(a, b, n).map_err(py_err)?;
    let prob = HMProblem::new(grid, cfg).map_err(py_err)?;
    let h = py.detach(|| solve_hastings_mcleod(&prob, None)).map_err(py_err)?.field;
    Ok((grid.nodes().collect(), h.into_values()))
}

/// Solve the two-dimensional connecting problem on `[x1min, x1max] × [0, x2max]`.
#[pyfunction]
#[pyo3(signature = (
    x1min = DEFAULT_X1.0, x1max = DEFAULT_X1.1, x2max = DEFAULT_X2MAX,
    n1 = DEFAULT_N1, n2 = DEFAULT_N2, abs_tol = 1e-9
))]
fn connecting_solution(
    py: Python<'_>,
    x1min: f64,
    x1max: f64,
    x2max: f64,
    n1: usize,
    n2: usize,
    abs_tol: f64,
) -> PyResult<Field> {
    let cfg = solver_config(abs_tol)?;
    let grid = Grid2D::new(x1min, x1max, 0.0, x2max, n1, n2).map_err(py_err)?;
    let y = py
        .detach(|| {
            let prob = ConnectProblem::with_matched_h(grid, cfg)?;
            solve_connecting(&prob, None)
        })
        .map_err(py_err)?
        .field;
    Ok(Field { inner: y })
}

/// Sample `sqrt(2/|x1|) y(x1, x2_offset + t2 / sqrt|x1|)`; returns `(t2, ytilde)`.
#[pyfunction]
#[pyo3(signature = (y, x1_level = -11.0, x2_offset = 0.0, t2_window = 4.0))]
fn rescaled_profile(y: &Field, x1_level: f64, x2_offset: f64, t2_window: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p = rescale_to_allen_cahn(&y.inner, x1_level, x2_offset, t2_window).map_err(py_err)?;
    Ok((p.t2_samples, p.values))
}

/// Minimize along a strictly decreasing list of ε.
#[pyfunction]
#[pyo3(signature = (epsilons, chi = DEFAULT_CHI, abs_tol = 1e-9))]
fn gl_minimizers(py: Python<'_>, epsilons: Vec<f64>, chi: f64, abs_tol: f64) -> PyResult<Vec<Minimizer>> {
    let cfg = solver_config(abs_tol)?;
    let chain = py
        .detach(|| gl::minimize_continuation(chi, &epsilons, cfg))
        .map_err(py_err)?;
    chain
        .into_iter()
        .map(|(prob, sol)| {
            let s = gl::summarize(&sol.field, &prob).map_err(py_err)?;
            Ok(Minimizer {
                epsilon: s.epsilon,
                chi: s.chi,
                energy: s.energy,
                energy_identity_gap: s.energy_identity_gap,
                thomas_fermi_gap: s.tf_gap,
                min_k_bound: s.min_k_bound,
                field: Py::new(py, Field { inner: sol.field })?,
            })
        })
        .collect()
}

#[pymodule]
fn painleve(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    m.add("NonPhysicalError", m.py().get_type::<NonPhysicalError>())?;
    m.add_class::<Field>()?;
    m.add_class::<Minimizer>()?;
    m.add_function(wrap_pyfunction!(airy_ai, m)?)?;
    m.add_function(wrap_pyfunction!(airy_ai_prime, m)?)?;
    m.add_function(wrap_pyfunction!(heteroclinic, m)?)?;
    m.add_function(wrap_pyfunction!(hastings_mcleod, m)?)?;
    m.add_function(wrap_pyfunction!(connecting_solution, m)?)?;
    m.add_function(wrap_pyfunction!(rescaled_profile, m)?)?;
    m.add_function(wrap_pyfunction!(gl_minimizers, m)?)?;
    Ok(())
}
