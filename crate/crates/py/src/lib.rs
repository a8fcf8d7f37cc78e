//! Python bindings: parameters, domains, time-dependent runs, pull-in
//! voltages, bounds and the field transforms.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use quench_core::asymptotics::{default_gap_window, rate_fit_window};
use quench_core::evolution::{self, quench_time_table, u_view, RunConfig, SweepTemplate};
use quench_core::geometry::build_grid;
use quench_core::stationary::{self, ShootingOptions};
use quench_core::transforms::{self, TransformContext};

fn err(e: quench_core::Error) -> PyErr {
    use quench_core::Error as E;
    match e {
        E::InvalidParameter(_) | E::OutOfRange(_) | E::UnsupportedDomain(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Applied voltage `lam` and fringing coefficient `delta`.
#[pyclass(frozen, skip_from_py_object, name = "Params", module = "quench")]
#[derive(Clone, Copy)]
struct Params {
    inner: quench_core::Params,
}

#[pymethods]
impl Params {
    #[new]
    fn new(lam: f64, delta: f64) -> PyResult<Self> {
        Ok(Self { inner: quench_core::Params::new(lam, delta).map_err(err)? })
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lambda
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta
    }

    fn zeta_boundary(&self) -> f64 {
        self.inner.zeta_boundary()
    }

    fn __repr__(&self) -> String {
        format!("Params(lam={}, delta={})", self.inner.lambda, self.inner.delta)
    }
}

#[pyclass(frozen, skip_from_py_object, name = "Domain", module = "quench")]
#[derive(Clone, Copy)]
struct Domain {
    inner: quench_core::Domain,
}

#[pymethods]
impl Domain {
    /// The slab [-1/2, 1/2].
    #[staticmethod]
    fn slab() -> Self {
        Self { inner: quench_core::Domain::slab() }
    }

    /// The unit disk in the plane.
    #[staticmethod]
    fn disk() -> Self {
        Self { inner: quench_core::Domain::unit_disk() }
    }

    #[getter]
    fn label(&self) -> &'static str {
        self.inner.label()
    }

    #[getter]
    fn size(&self) -> f64 {
        self.inner.size
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim
    }

    fn __repr__(&self) -> String {
        format!("Domain.{}()", self.inner.label())
    }
}

/// Result of a time-dependent run. Profiles are in the cubic variable
/// `zeta`; `final_u` is the deflection.
#[pyclass(frozen, name = "Outcome", module = "quench", get_all)]
struct Outcome {
    kind: String,
    t_ex: Option<f64>,
    t_ex_interp: Option<f64>,
    steps: u64,
    quench_node: Option<f64>,
    nodes: Vec<f64>,
    final_zeta: Vec<f64>,
    final_u: Vec<f64>,
    snapshot_times: Vec<f64>,
    snapshots: Vec<Vec<f64>>,
    /// `(t, min zeta, max u)` per traced step.
    trace: Vec<(f64, f64, f64)>,
}

#[pymethods]
impl Outcome {
    fn __repr__(&self) -> String {
        format!("Outcome(kind={:?}, t_ex={:?}, steps={})", self.kind, self.t_ex, self.steps)
    }
}

#[pyfunction]
#[pyo3(signature = (params, domain, n=200, dt=6e-6, stop_tol=1e-10, max_steps=None, snapshot_times=None, trace_stride=0))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    params: &Params,
    domain: &Domain,
    n: usize,
    dt: f64,
    stop_tol: f64,
    max_steps: Option<u64>,
    snapshot_times: Option<Vec<f64>>,
    trace_stride: u64,
) -> PyResult<Outcome> {
    let (p, d) = (params.inner, domain.inner);
    let out = py
        .detach(|| {
            let grid = Arc::new(build_grid(d, n)?);
            let mut cfg = RunConfig::new(p, grid, dt)?
                .with_snapshots(snapshot_times.unwrap_or_default())
                .with_trace(trace_stride);
            if let Some(m) = max_steps {
                cfg = cfg.with_max_steps(m);
            }
            cfg.stop_tol = stop_tol;
            evolution::run(&cfg)
        })
        .map_err(err)?;
    Ok(Outcome {
        kind: out.kind.label().into(),
        t_ex: out.t_ex,
        t_ex_interp: out.t_ex_interp,
        steps: out.steps,
        quench_node: out.quench_node,
        nodes: out.final_field.grid.nodes.clone(),
        final_u: u_view(&out.final_field, &p).values,
        final_zeta: out.final_field.values,
        snapshot_times: out.snapshots.iter().map(|s| s.time).collect(),
        snapshots: out.snapshots.into_iter().map(|s| s.values).collect(),
        trace: out.trace.iter().map(|t| (t.time, t.min_zeta, t.max_u)).collect(),
    })
}

#[pyclass(frozen, name = "PullIn", module = "quench", get_all)]
struct PullIn {
    delta: f64,
    lambda_star: f64,
    alpha_star: f64,
    tolerance: f64,
    interior_maxima: usize,
    /// `(alpha, lambda)` samples of the stationary branch.
    branch: Vec<(f64, f64)>,
}

#[pymethods]
impl PullIn {
    fn __repr__(&self) -> String {
        format!("PullIn(delta={}, lambda_star={}, alpha_star={})", self.delta, self.lambda_star, self.alpha_star)
    }
}

#[pyfunction]
#[pyo3(signature = (delta, domain, alpha_grid=64))]
fn pull_in(py: Python<'_>, delta: f64, domain: &Domain, alpha_grid: usize) -> PyResult<PullIn> {
    let d = domain.inner;
    let r = py.detach(|| stationary::pull_in(delta, &d, alpha_grid, &ShootingOptions::default())).map_err(err)?;
    Ok(PullIn {
        delta: r.delta,
        lambda_star: r.lambda_star,
        alpha_star: r.alpha_star,
        tolerance: r.tolerance,
        interior_maxima: r.interior_maxima(),
        branch: r.branch,
    })
}

/// Closed-form pull-in bounds for one `delta`.
#[pyfunction]
fn bounds<'py>(py: Python<'py>, delta: f64, domain: &Domain) -> PyResult<Bound<'py, PyDict>> {
    let d = domain.inner;
    let out = PyDict::new(py);
    out.set_item("lambda_l", stationary::bound_lambda_l(delta, &d))?;
    out.set_item("lambda_u1", stationary::bound_lambda_u1(delta, &d).map_err(err)?)?;
    out.set_item("natural", stationary::bound_natural(&d).map_err(err)?)?;
    Ok(out)
}

/// Upper bound on the quench time, valid above `mu0/3`.
#[pyfunction]
fn t_upper(lam: f64, domain: &Domain) -> PyResult<f64> {
    stationary::bound_t_upper(lam, &domain.inner).map_err(err)
}

#[pyfunction]
fn cubic_of_u(u: f64, params: &Params) -> PyResult<f64> {
    transforms::cubic_of_u(u, &params.inner).map_err(err)
}

#[pyfunction]
fn u_of_cubic(zeta: f64, params: &Params) -> PyResult<f64> {
    transforms::u_of_cubic(zeta, &params.inner).map_err(err)
}

#[pyfunction]
fn exp_transform(u: f64, params: &Params) -> PyResult<f64> {
    TransformContext::new(params.inner).exp_transform(u).map_err(err)
}

#[pyfunction]
fn u_of_exp(v: f64, params: &Params) -> PyResult<f64> {
    TransformContext::new(params.inner).u_of_exp(v).map_err(err)
}

/// Fits `1 - u ~ A (T - t)^p` to `(t, max u)` samples over a window in
/// `T - t`, by default `[10 dt, T/10]`.
#[pyfunction]
#[pyo3(signature = (series, t_quench, dt=6e-6, window=None))]
fn rate_fit<'py>(
    py: Python<'py>,
    series: Vec<(f64, f64)>,
    t_quench: f64,
    dt: f64,
    window: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let w = window.unwrap_or_else(|| default_gap_window(t_quench, dt));
    let fit = rate_fit_window(&series, t_quench, w).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("exponent", fit.exponent)?;
    out.set_item("amplitude", fit.amplitude)?;
    out.set_item("residual", fit.residual)?;
    out.set_item("samples", fit.samples)?;
    out.set_item("window", fit.window)?;
    Ok(out)
}

/// Quench times over `deltas x lambdas` as `(delta, lambda, status, t_ex,
/// lambda * t_ex)` tuples; steady rows have an infinite time.
#[pyfunction]
#[pyo3(signature = (domain, deltas, lambdas, n=200, dt=6e-6))]
fn quench_table(
    py: Python<'_>,
    domain: &Domain,
    deltas: Vec<f64>,
    lambdas: Vec<f64>,
    n: usize,
    dt: f64,
) -> Vec<(f64, f64, String, f64, f64)> {
    let template = SweepTemplate { n_interior: n, dt, ..SweepTemplate::default() };
    let d = domain.inner;
    let rows = py.detach(|| quench_time_table(d, &deltas, &lambdas, &template));
    rows.into_iter()
        .map(|r| {
            let status = match &r.outcome {
                Ok(k) => k.label().to_string(),
                Err(e) => format!("error: {e}"),
            };
            (r.delta, r.lambda, status, r.t_ex, r.lambda_t_ex)
        })
        .collect()
}

#[pymodule]
fn quench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Params>()?;
    m.add_class::<Domain>()?;
    m.add_class::<Outcome>()?;
    m.add_class::<PullIn>()?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(pull_in, m)?)?;
    m.add_function(wrap_pyfunction!(bounds, m)?)?;
    m.add_function(wrap_pyfunction!(t_upper, m)?)?;
    m.add_function(wrap_pyfunction!(cubic_of_u, m)?)?;
    m.add_function(wrap_pyfunction!(u_of_cubic, m)?)?;
    m.add_function(wrap_pyfunction!(exp_transform, m)?)?;
    m.add_function(wrap_pyfunction!(u_of_exp, m)?)?;
    m.add_function(wrap_pyfunction!(rate_fit, m)?)?;
    m.add_function(wrap_pyfunction!(quench_table, m)?)?;
    Ok(())
}
