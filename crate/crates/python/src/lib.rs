//! Python bindings: spin-factor elements, the central-path solve, the
//! denoising problems and the three solvers.

use std::fmt::Display;

use pedi_core::barrier::{self, CentralPathPoint};
use pedi_core::imaging::{self, ImageGrid};
use pedi_core::solver::no_observer;
use pedi_core::{BaselineConfig, PediConfig, RankOneConstraint, SpinElement, StepRule, Variant};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "SpinElement", module = "pedi", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PySpin(SpinElement);

#[pymethods]
impl PySpin {
    #[new]
    fn new(head: f64, tail: Vec<f64>) -> PyResult<Self> {
        SpinElement::new(head, tail).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn identity(m: usize) -> Self {
        Self(SpinElement::identity(m))
    }

    #[staticmethod]
    fn zero(m: usize) -> Self {
        Self(SpinElement::zero(m))
    }

    #[staticmethod]
    fn from_coords(coords: Vec<f64>) -> PyResult<Self> {
        SpinElement::from_coords(&coords)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn head(&self) -> f64 {
        self.0.head()
    }

    #[getter]
    fn tail(&self) -> Vec<f64> {
        self.0.tail().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn coords(&self) -> Vec<f64> {
        self.0.coords()
    }

    fn product(&self, other: &Self) -> PyResult<Self> {
        self.0.product(&other.0).map(Self).map_err(value_err)
    }

    /// Trace inner product `2 xᵀy`.
    fn inner(&self, other: &Self) -> PyResult<f64> {
        self.0.inner(&other.0).map_err(value_err)
    }

    fn norm(&self) -> f64 {
        self.0.norm()
    }

    fn det(&self) -> f64 {
        self.0.det()
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    fn lambda_min(&self) -> f64 {
        self.0.lambda_min()
    }

    fn lambda_max(&self) -> f64 {
        self.0.lambda_max()
    }

    fn square(&self) -> Self {
        Self(self.0.square())
    }

    fn inverse(&self) -> PyResult<Self> {
        self.0.inverse().map(Self).map_err(value_err)
    }

    fn power(&self, alpha: f64) -> PyResult<Self> {
        self.0.power(alpha).map(Self).map_err(value_err)
    }

    /// `Q_x y`.
    fn quad_rep(&self, y: &Self) -> PyResult<Self> {
        self.0.quad_rep(&y.0).map(Self).map_err(value_err)
    }

    fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    #[pyo3(signature = (tol = 0.0))]
    fn is_interior(&self, tol: f64) -> bool {
        self.0.is_interior(tol)
    }

    #[pyo3(signature = (tol = 0.0))]
    fn is_in_cone(&self, tol: f64) -> bool {
        self.0.is_in_cone(tol)
    }

    fn __add__(&self, other: &Self) -> PyResult<Self> {
        self.0.axpy(1.0, &other.0).map(Self).map_err(value_err)
    }

    fn __sub__(&self, other: &Self) -> PyResult<Self> {
        self.0.axpy(-1.0, &other.0).map(Self).map_err(value_err)
    }

    fn __neg__(&self) -> Self {
        Self(-&self.0)
    }

    fn __repr__(&self) -> String {
        format!("SpinElement({}, {:?})", self.0.head(), self.0.tail())
    }
}

#[pyclass(name = "RankOneConstraint", module = "pedi", frozen)]
struct PyConstraint(RankOneConstraint);

#[pymethods]
impl PyConstraint {
    /// `⟨a, y⟩ = b0` with `a` strictly inside the cone.
    #[new]
    fn new(a: &PySpin, b0: f64) -> PyResult<Self> {
        RankOneConstraint::new(a.0.clone(), b0)
            .map(Self)
            .map_err(value_err)
    }

    #[staticmethod]
    fn unit(m: usize, b0: f64) -> PyResult<Self> {
        RankOneConstraint::unit(m, b0).map(Self).map_err(value_err)
    }

    #[getter]
    fn a(&self) -> PySpin {
        PySpin(self.0.a().clone())
    }

    #[getter]
    fn a_inv(&self) -> PySpin {
        PySpin(self.0.a_inv().clone())
    }

    #[getter]
    fn b0(&self) -> f64 {
        self.0.b0()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn apply(&self, y: &PySpin) -> PyResult<f64> {
        self.0.apply(&y.0).map_err(value_err)
    }
}

#[pyclass(name = "CentralPathPoint", module = "pedi", frozen)]
struct PyPoint(CentralPathPoint);

#[pymethods]
impl PyPoint {
    #[getter]
    fn y(&self) -> PySpin {
        PySpin(self.0.y().clone())
    }

    #[getter]
    fn d(&self) -> PySpin {
        PySpin(self.0.d().clone())
    }

    #[getter]
    fn z(&self) -> f64 {
        self.0.z()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn det_d(&self) -> f64 {
        self.0.det_d()
    }

    /// `‖y ∘ d − μ e‖`.
    fn complementarity_residual(&self) -> f64 {
        self.0.complementarity_residual()
    }
}

#[pyfunction]
fn barrier_value(x: &PySpin) -> PyResult<f64> {
    barrier::barrier_value(&x.0).map_err(value_err)
}

#[pyfunction]
fn barrier_gradient(x: &PySpin) -> PyResult<PySpin> {
    barrier::barrier_gradient(&x.0)
        .map(PySpin)
        .map_err(value_err)
}

#[pyfunction]
fn central_path_solve(constraint: &PyConstraint, c: &PySpin, mu: f64) -> PyResult<PyPoint> {
    barrier::central_path_solve(&constraint.0, &c.0, mu)
        .map(PyPoint)
        .map_err(value_err)
}

/// The `μ → 0` limit: `(y, d, z)`.
#[pyfunction]
fn sclp_solve(constraint: &PyConstraint, c: &PySpin) -> PyResult<(PySpin, PySpin, f64)> {
    let s = barrier::sclp_solve(&constraint.0, &c.0).map_err(value_err)?;
    Ok((PySpin(s.y), PySpin(s.d), s.z))
}

#[pyfunction]
fn df_distance(w: &PySpin, d: &PySpin) -> PyResult<f64> {
    barrier::df_distance(&w.0, &d.0).map_err(value_err)
}

#[pyfunction]
fn min_eig_m(y: &PySpin, d: &PySpin, constraint: &PyConstraint) -> PyResult<f64> {
    barrier::min_eig_m(&y.0, &d.0, &constraint.0).map_err(value_err)
}

/// Row-major `n1 × n2` test image.
#[pyfunction]
fn synthetic_image(n1: usize, n2: usize) -> PyResult<Vec<f64>> {
    imaging::synthetic_image(n1, n2)
        .map(|g| g.values().to_vec())
        .map_err(value_err)
}

#[pyfunction]
fn add_gaussian_noise(
    values: Vec<f64>,
    n1: usize,
    n2: usize,
    sigma: f64,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let grid = ImageGrid::new(n1, n2, values).map_err(value_err)?;
    imaging::add_gaussian_noise(&grid, sigma, seed)
        .map(|g| g.values().to_vec())
        .map_err(value_err)
}

#[pyclass(name = "DenoiseProblem", module = "pedi", frozen)]
struct PyProblem(pedi_core::DenoiseProblem);

#[pymethods]
impl PyProblem {
    /// `min ½‖z − x‖² + α R(x)` with `variant` `"tv"` or `"h1"`.
    #[new]
    fn new(z: Vec<f64>, n1: usize, n2: usize, alpha: f64, variant: &str) -> PyResult<Self> {
        let variant: Variant = variant.parse().map_err(PyValueError::new_err)?;
        let grid = ImageGrid::new(n1, n2, z).map_err(value_err)?;
        pedi_core::build_problem(grid, alpha, variant)
            .map(Self)
            .map_err(value_err)
    }

    #[getter]
    fn n1(&self) -> usize {
        self.0.n1()
    }

    #[getter]
    fn n2(&self) -> usize {
        self.0.n2()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha()
    }

    #[getter]
    fn variant(&self) -> String {
        self.0.variant().to_string()
    }

    #[getter]
    fn opnorm_d(&self) -> f64 {
        self.0.opnorm_d()
    }

    fn primal_value(&self, x: Vec<f64>) -> PyResult<f64> {
        self.check_len(&x, self.0.pixels())?;
        Ok(self.0.primal_value(&x))
    }

    fn dual_value(&self, p: Vec<f64>) -> PyResult<f64> {
        self.check_len(&p, self.0.field_len())?;
        Ok(self.0.dual_value(&p))
    }

    fn gap(&self, x: Vec<f64>, p: Vec<f64>) -> PyResult<f64> {
        self.check_len(&x, self.0.pixels())?;
        self.check_len(&p, self.0.field_len())?;
        Ok(self.0.gap(&x, &p))
    }

    fn initial_gap(&self) -> f64 {
        self.0.initial_gap()
    }
}

impl PyProblem {
    fn check_len(&self, v: &[f64], n: usize) -> PyResult<()> {
        if v.len() != n {
            return Err(PyValueError::new_err(format!(
                "expected {n} values, got {}",
                v.len()
            )));
        }
        Ok(())
    }
}

/// Runs PEDI and returns `(x, iterations)`.
#[pyfunction(name = "pedi")]
#[pyo3(signature = (problem, iters, rule = "general", gamma = 0.9, zeta = None, theta = None, tau0 = None))]
#[allow(clippy::too_many_arguments)]
fn pedi_solve(
    py: Python<'_>,
    problem: &PyProblem,
    iters: usize,
    rule: &str,
    gamma: f64,
    zeta: Option<f64>,
    theta: Option<f64>,
    tau0: Option<f64>,
) -> PyResult<(Vec<f64>, usize)> {
    let rule = match rule {
        "general" => StepRule::General,
        "soc" => StepRule::Soc,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown step rule {other:?}, expected general or soc"
            )))
        }
    };
    let config = PediConfig {
        rule,
        gamma,
        zeta,
        theta,
        tau0,
        max_iters: iters,
        ..Default::default()
    };
    let out = py
        .detach(|| pedi_core::pedi_run(&problem.0, &config, None, &mut no_observer))
        .map_err(value_err)?;
    Ok((out.x, out.iterations))
}

/// Accelerated PDHGM; returns `(x, p)`.
#[pyfunction]
fn pdhgm(py: Python<'_>, problem: &PyProblem, iters: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let out = py
        .detach(|| {
            pedi_core::pdhgm_run(&problem.0, &BaselineConfig::pdhgm(iters), &mut no_observer)
        })
        .map_err(value_err)?;
    Ok((out.x, out.p))
}

/// Forward-backward on the dual; returns `(x, p)`.
#[pyfunction]
fn dual_fb(py: Python<'_>, problem: &PyProblem, iters: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let out = py
        .detach(|| {
            pedi_core::dual_fb_run(
                &problem.0,
                &BaselineConfig::dual_fb(iters),
                &mut no_observer,
            )
        })
        .map_err(value_err)?;
    Ok((out.x, out.p))
}

#[pymodule(name = "pedi")]
fn pedi_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", pedi_core::VERSION)?;
    m.add_class::<PySpin>()?;
    m.add_class::<PyConstraint>()?;
    m.add_class::<PyPoint>()?;
    m.add_class::<PyProblem>()?;
    m.add_function(wrap_pyfunction!(barrier_value, m)?)?;
    m.add_function(wrap_pyfunction!(barrier_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(central_path_solve, m)?)?;
    m.add_function(wrap_pyfunction!(sclp_solve, m)?)?;
    m.add_function(wrap_pyfunction!(df_distance, m)?)?;
    m.add_function(wrap_pyfunction!(min_eig_m, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_image, m)?)?;
    m.add_function(wrap_pyfunction!(add_gaussian_noise, m)?)?;
    m.add_function(wrap_pyfunction!(pedi_solve, m)?)?;
    m.add_function(wrap_pyfunction!(pdhgm, m)?)?;
    m.add_function(wrap_pyfunction!(dual_fb, m)?)?;
    Ok(())
}
