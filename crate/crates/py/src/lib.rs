//! Python bindings: rigorous intervals, the covering verifier, the degree
//! and rate helpers, and the enclosure algorithm.
//!
//! Build with `cargo build -p circover-py --release`, then copy or symlink
//! `target/release/libcircover.so` as `circover.so` somewhere on
//! `PYTHONPATH` (see `python/smoke_test.py`).

use std::collections::BTreeMap;

use pyo3::exceptions::{PyValueError, PyZeroDivisionError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use circover_core::config::{build_homotopy_from_def, MapDef};
use circover_core::covering;
use circover_core::dynamics::{self, DynError, Params};
use circover_core::enclosure;
use circover_core::expr;
use circover_core::geometry::{DomainSpec, SubdivisionScheme};
use circover_core::interval;

fn value_err(msg: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(msg.to_string())
}

/// A closed interval with outward-rounded arithmetic.
#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct Interval {
    inner: interval::Interval,
}

impl From<interval::Interval> for Interval {
    fn from(inner: interval::Interval) -> Interval {
        Interval { inner }
    }
}

#[pymethods]
impl Interval {
    #[new]
    #[pyo3(signature = (lo, hi=None))]
    fn new(lo: f64, hi: Option<f64>) -> PyResult<Interval> {
        let hi = hi.unwrap_or(lo);
        Ok(interval::Interval::checked(lo, hi)
            .map_err(value_err)?
            .into())
    }

    #[getter]
    fn lo(&self) -> f64 {
        self.inner.lo()
    }

    #[getter]
    fn hi(&self) -> f64 {
        self.inner.hi()
    }

    fn width(&self) -> f64 {
        self.inner.width()
    }

    fn midpoint(&self) -> f64 {
        self.inner.midpoint()
    }

    fn __add__(&self, rhs: &Interval) -> Interval {
        self.inner.add(rhs.inner).into()
    }

    fn __sub__(&self, rhs: &Interval) -> Interval {
        self.inner.sub(rhs.inner).into()
    }

    fn __mul__(&self, rhs: &Interval) -> Interval {
        self.inner.mul(rhs.inner).into()
    }

    fn __truediv__(&self, rhs: &Interval) -> PyResult<Interval> {
        self.inner
            .div(rhs.inner)
            .map(Interval::from)
            .map_err(|e| PyZeroDivisionError::new_err(e.to_string()))
    }

    fn __neg__(&self) -> Interval {
        self.inner.neg().into()
    }

    fn power(&self, n: u32) -> Interval {
        self.inner.power(n).into()
    }

    fn sin(&self) -> Interval {
        self.inner.sin().into()
    }

    fn cos(&self) -> Interval {
        self.inner.cos().into()
    }

    fn part(&self, n: usize, k: usize) -> PyResult<Interval> {
        if k >= n {
            return Err(value_err(format!("part index {k} out of range for {n} parts")));
        }
        Ok(self.inner.part(n, k).into())
    }

    fn contains(&self, p: f64) -> bool {
        self.inner.contains(p)
    }

    fn intersects(&self, rhs: &Interval) -> bool {
        self.inner.intersects(rhs.inner)
    }

    fn subset(&self, rhs: &Interval) -> bool {
        self.inner.subset(rhs.inner)
    }

    fn subset_interior(&self, rhs: &Interval) -> bool {
        self.inner.subset_interior(rhs.inner)
    }

    fn certainly_less(&self, rhs: &Interval) -> bool {
        self.inner.certainly_less(rhs.inner)
    }

    fn __repr__(&self) -> String {
        format!("Interval({}, {})", self.inner.lo(), self.inner.hi())
    }
}

#[pyfunction]
fn two_pi() -> Interval {
    interval::Interval::TWO_PI.into()
}

/// Rigorous enclosure of the rational num/den.
#[pyfunction]
fn ratio(num: i64, den: i64) -> PyResult<Interval> {
    interval::Interval::from_ratio(num, den)
        .map(Interval::from)
        .map_err(value_err)
}

/// Rigorous degree of a circle map from a continuous lift expression in
/// `theta`, e.g. `"3*theta"`.
#[pyfunction]
#[pyo3(signature = (eta, parts=100))]
fn compute_degree(eta: &str, parts: usize) -> PyResult<i64> {
    let lift = expr::parse(eta, &BTreeMap::new()).map_err(value_err)?;
    let eta = dynamics::EtaLift::new(std::sync::Arc::new(move |theta| {
        let env = expr::Env::point_free(
            theta,
            interval::Interval::point(0.0),
            interval::Interval::point(0.0),
        );
        lift.eval(&env).map_err(|e| match e {
            expr::ExprError::Eval(iv) => DynError::eval(iv),
            other => DynError::BadParam {
                name: "eta".into(),
                reason: other.to_string(),
            },
        })
    }));
    covering::compute_degree(&eta, interval::Interval::TWO_PI, parts).map_err(value_err)
}

/// Smallest k >= 1 with C * lambda^k < 1, certified with interval rounding.
#[pyfunction]
fn nhim_min_k(c: f64, lam: f64) -> PyResult<u32> {
    covering::nhim_min_k(c, lam).map_err(value_err)
}

fn parse_params(
    mu: Option<&str>,
    beta: Option<&str>,
    winding: Option<i64>,
    rate_a: Option<&str>,
    rate_b: Option<&str>,
) -> PyResult<Params> {
    let mut params = Params::new();
    if let Some(mu) = mu {
        params.insert("mu".into(), expr::parse_param(mu).map_err(value_err)?);
    }
    if let Some(beta) = beta {
        params.insert("beta".into(), expr::parse_param(beta).map_err(value_err)?);
    }
    if let Some(w) = winding {
        params.insert("winding".into(), interval::Interval::point(w as f64));
    }
    if let Some(a) = rate_a {
        params.insert("a".into(), expr::parse_param(a).map_err(value_err)?);
    }
    if let Some(b) = rate_b {
        params.insert("b".into(), expr::parse_param(b).map_err(value_err)?);
    }
    Ok(params)
}

fn report_to_dict<'py>(
    py: Python<'py>,
    report: &covering::CoveringReport,
) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("verdict", report.verdict.to_string())?;
    dict.set_item("mode", report.mode.to_string())?;
    dict.set_item("exit_ok", report.exit_ok)?;
    dict.set_item("entry_ok", report.entry_ok)?;
    dict.set_item("expansion_ok", report.expansion_ok)?;
    dict.set_item("degree", report.degree)?;
    dict.set_item("deg2", report.deg2())?;
    dict.set_item("failed_total", report.failed_total)?;
    dict.set_item(
        "cells_checked",
        (
            report.cells_checked.exit,
            report.cells_checked.entry,
            report.cells_checked.expansion,
        ),
    )?;
    dict.set_item("wall_time_s", report.wall_time.as_secs_f64())?;
    dict.set_item("reasons", report.reasons.clone())?;
    Ok(dict)
}

/// Verifies a covering relation for a builtin homotopy.
///
/// `map_name`: "cap", "toy", or "linear_nhim"; `mode`: "fiber" or "full";
/// `scheme`: (n_alpha, n_theta, n_x, n_y). Returns a report dict.
#[pyfunction]
#[pyo3(signature = (map_name, mode="full", scheme=(4, 100, 50, 50), r_u=1.0, r_s=1.2,
                    mu=None, beta=None, winding=None, rate_a=None, rate_b=None,
                    refine_depth=10))]
#[allow(clippy::too_many_arguments)]
fn verify<'py>(
    py: Python<'py>,
    map_name: &str,
    mode: &str,
    scheme: (usize, usize, usize, usize),
    r_u: f64,
    r_s: f64,
    mu: Option<&str>,
    beta: Option<&str>,
    winding: Option<i64>,
    rate_a: Option<&str>,
    rate_b: Option<&str>,
    refine_depth: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let name = match map_name {
        "cap" => "cap_homotopy",
        "toy" => "toy_homotopy",
        other => other,
    };
    let params = parse_params(mu, beta, winding, rate_a, rate_b)?;
    let system = dynamics::builtin(name, &params).map_err(value_err)?;
    let h = system
        .into_homotopy()
        .ok_or_else(|| value_err(format!("builtin `{name}` is a plain map, not a homotopy")))?;
    let domain = DomainSpec::new(r_u, r_s).map_err(value_err)?;
    let s = SubdivisionScheme::new(scheme.0, scheme.1, scheme.2, scheme.3).map_err(value_err)?;
    let report = py.detach(|| match mode {
        "fiber" => Ok(covering::verify_fiber_covering(&h, &domain, &s, refine_depth)),
        "full" => Ok(covering::verify_full_covering(&h, &domain, &s, refine_depth)),
        other => Err(value_err(format!("unknown mode `{other}` (fiber|full)"))),
    })?;
    report_to_dict(py, &report)
}

/// Verifies a custom homotopy given as expression strings (variables
/// `alpha`, `theta`, `x`, `y`, optional `beta`).
#[pyfunction]
#[pyo3(signature = (h_theta, h_x, h_y, eta_lift, a_coeff, mode="full",
                    scheme=(4, 100, 50, 50), r_u=1.0, r_s=1.2, constants=None,
                    beta=None, refine_depth=10))]
#[allow(clippy::too_many_arguments)]
fn verify_expr<'py>(
    py: Python<'py>,
    h_theta: &str,
    h_x: &str,
    h_y: &str,
    eta_lift: &str,
    a_coeff: &str,
    mode: &str,
    scheme: (usize, usize, usize, usize),
    r_u: f64,
    r_s: f64,
    constants: Option<BTreeMap<String, String>>,
    beta: Option<&str>,
    refine_depth: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let def = MapDef {
        constants: constants.unwrap_or_default(),
        h_theta: Some(h_theta.into()),
        h_x: Some(h_x.into()),
        h_y: Some(h_y.into()),
        eta_lift: Some(eta_lift.into()),
        a_coeff: Some(a_coeff.into()),
        ..MapDef::default()
    };
    let family = match beta {
        None => None,
        Some(b) => {
            let range = expr::parse_param(b).map_err(value_err)?;
            (range.width() > 0.0).then_some(range)
        }
    };
    let h = build_homotopy_from_def(&def, family).map_err(value_err)?;
    let domain = DomainSpec::new(r_u, r_s).map_err(value_err)?;
    let s = SubdivisionScheme::new(scheme.0, scheme.1, scheme.2, scheme.3).map_err(value_err)?;
    let report = py.detach(|| match mode {
        "fiber" => Ok(covering::verify_fiber_covering(&h, &domain, &s, refine_depth)),
        "full" => Ok(covering::verify_full_covering(&h, &domain, &s, refine_depth)),
        other => Err(value_err(format!("unknown mode `{other}` (fiber|full)"))),
    })?;
    report_to_dict(py, &report)
}

type SliceRects = Vec<(f64, f64, f64, f64)>;

/// Runs the invariant-set enclosure algorithm for a builtin map and returns
/// `(survivor_counts, slice_rectangles)` where the rectangles are
/// `(x_lo, x_hi, y_lo, y_hi)` of final survivors containing `slice_theta`.
#[pyfunction]
#[pyo3(signature = (map_name, box_r=2.0, disc_r=None, grid=(24, 24, 24), steps=2,
                    iterates=3, slice_theta=None, mu=None))]
#[allow(clippy::too_many_arguments)]
fn enclose(
    py: Python<'_>,
    map_name: &str,
    box_r: f64,
    disc_r: Option<f64>,
    grid: (usize, usize, usize),
    steps: usize,
    iterates: usize,
    slice_theta: Option<f64>,
    mu: Option<&str>,
) -> PyResult<(Vec<usize>, SliceRects)> {
    let name = match map_name {
        "cap" => "cap_map",
        "toy" => "toy_fbeta",
        other => other,
    };
    let params = parse_params(mu, None, None, None, None)?;
    let system = dynamics::builtin(name, &params).map_err(value_err)?;
    let map = system.map().clone();
    let mut spec = enclosure::EnclosureSpec::centered_box(box_r, grid);
    if let Some(r) = disc_r {
        spec = spec.with_disc(r);
    }
    spec.refine_steps = steps;
    spec.max_iterates = iterates;
    let run = py.detach(|| enclosure::propagate(&map, &spec)).map_err(value_err)?;
    let counts: Vec<usize> = run.steps.iter().map(|s| s.survivors.len()).collect();
    let rects = match slice_theta {
        None => Vec::new(),
        Some(theta) => enclosure::slice(&run, theta)
            .iter()
            .map(|c| (c.x.lo(), c.x.hi(), c.y.lo(), c.y.hi()))
            .collect(),
    };
    Ok((counts, rects))
}

#[pymodule]
fn circover(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Interval>()?;
    m.add_function(wrap_pyfunction!(two_pi, m)?)?;
    m.add_function(wrap_pyfunction!(ratio, m)?)?;
    m.add_function(wrap_pyfunction!(compute_degree, m)?)?;
    m.add_function(wrap_pyfunction!(nhim_min_k, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(verify_expr, m)?)?;
    m.add_function(wrap_pyfunction!(enclose, m)?)?;
    Ok(())
}
