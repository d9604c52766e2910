//! Python bindings for the main types and operations: the Airy layer, the
//! Tracy-Widom and Baik-Rains distributions, the two-time distribution and
//! its expansion coefficients, and the last-passage simulator.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use kpztt::coeffs::{self, LongTimePoint};
use kpztt::lppsim::{self, LppConfig};
use kpztt::twotime::{self, ContourConfig, ShortTimeFrame, TwoTimeParams};

fn err(e: kpztt::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Airy function of the first kind.
#[pyfunction]
fn airy_ai(x: f64) -> f64 {
    kpztt::airy::airy_ai(x)
}

/// Tracy-Widom GUE distribution from the Fredholm pipeline.
#[pyfunction]
#[pyo3(signature = (s, nodes = 48))]
fn tracy_widom_f2(s: f64, nodes: usize) -> f64 {
    coeffs::tracy_widom_f2_n(s, nodes)
}

/// First two derivatives of the Tracy-Widom distribution.
#[pyfunction]
#[pyo3(signature = (s, nodes = 48))]
fn f2_derivs(s: f64, nodes: usize) -> PyResult<(f64, f64)> {
    coeffs::f2_derivs_n(s, nodes).map_err(err)
}

/// Short-time function ψ(ξ, η).
#[pyfunction]
#[pyo3(signature = (xi, eta = 0.0, nodes = 48))]
fn short_time_psi(xi: f64, eta: f64, nodes: usize) -> PyResult<f64> {
    Ok(coeffs::short_time_psi(xi, eta, nodes).map_err(err)?.psi)
}

/// Baik-Rains distribution F₀(ξ).
#[pyfunction]
#[pyo3(signature = (xi, nodes = 48))]
fn baik_rains_f0(xi: f64, nodes: usize) -> PyResult<f64> {
    coeffs::baik_rains_f0(xi, nodes).map_err(err)
}

/// Two-time distribution; returns (value, imaginary_residual).
#[pyfunction]
#[pyo3(signature = (xi1, eta1, xi2, eta2, alpha, nodes = 48, circle_points = 128))]
fn ftt(
    xi1: f64,
    eta1: f64,
    xi2: f64,
    eta2: f64,
    alpha: f64,
    nodes: usize,
    circle_points: usize,
) -> PyResult<(f64, f64)> {
    let p = TwoTimeParams::new(xi1, eta1, xi2, eta2, alpha).map_err(err)?;
    let c = ContourConfig {
        nodes,
        circle_points,
        ..ContourConfig::default_for(alpha)
    };
    let got = twotime::ftt(&p, &c).map_err(err)?;
    Ok((got.value, got.im_residual))
}

/// Long-time expansion coefficients e₁, e₂ and their constituents.
#[pyfunction]
#[pyo3(signature = (xi1, eta1, xi2, eta2, nodes = 48))]
fn long_time_coeffs<'py>(
    py: Python<'py>,
    xi1: f64,
    eta1: f64,
    xi2: f64,
    eta2: f64,
    nodes: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let res = coeffs::long_time_coeffs(
        LongTimePoint {
            xi1,
            eta1,
            xi2,
            eta2,
        },
        nodes,
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("e1", res.e1)?;
    d.set_item("e2", res.e2)?;
    d.set_item("r1", res.r1)?;
    d.set_item("a0", res.a0)?;
    d.set_item("a1", res.a1)?;
    d.set_item("psi1", res.psi1)?;
    d.set_item("psi2", res.psi2)?;
    d.set_item("phi1", res.phi1_plus)?;
    d.set_item("phi2", res.phi2_plus)?;
    Ok(d)
}

/// Least-squares fit of F_tt against the α-expansion; returns a dict with
/// e1_hat, e2_hat and the residual slope.
#[pyfunction]
#[pyo3(signature = (xi1, eta1, xi2, eta2, alphas, nodes = 48, circle_points = 128))]
#[allow(clippy::too_many_arguments)]
fn long_time_fit<'py>(
    py: Python<'py>,
    xi1: f64,
    eta1: f64,
    xi2: f64,
    eta2: f64,
    alphas: Vec<f64>,
    nodes: usize,
    circle_points: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let c = ContourConfig {
        nodes,
        circle_points,
        ..ContourConfig::default_for(0.05)
    };
    let fit = twotime::long_time_fit(
        &LongTimePoint {
            xi1,
            eta1,
            xi2,
            eta2,
        },
        &alphas,
        &c,
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("e1_hat", fit.e1_hat)?;
    d.set_item("e2_hat", fit.e2_hat)?;
    d.set_item("residual_slope", fit.residual_slope)?;
    Ok(d)
}

/// Short-time comparison at one α; returns (lhs, rhs).
#[pyfunction]
#[pyo3(signature = (xi1, eta1, xi, eta, alpha, nodes = 48, circle_points = 128))]
fn short_time_check(
    xi1: f64,
    eta1: f64,
    xi: f64,
    eta: f64,
    alpha: f64,
    nodes: usize,
    circle_points: usize,
) -> PyResult<(f64, f64)> {
    let c = ContourConfig {
        nodes,
        circle_points,
        ..ContourConfig::default_for(alpha)
    };
    twotime::short_time_check(
        &ShortTimeFrame {
            xi1,
            eta1,
            xi,
            eta,
            alpha,
        },
        &c,
    )
    .map_err(err)
}

/// Monte Carlo two-time sampling; returns a dict with the rescaled height
/// pairs and run parameters.
#[pyfunction]
#[pyo3(signature = (q = 0.25, t_scale = 100.0, t1 = 1.0, t2 = 2.0, eta1 = 0.0, eta2 = 0.0, samples = 2000, seed = 2024))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    q: f64,
    t_scale: f64,
    t1: f64,
    t2: f64,
    eta1: f64,
    eta2: f64,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = LppConfig {
        q,
        t_scale,
        t1,
        t2,
        eta1,
        eta2,
        samples,
        seed,
    };
    let pairs = lppsim::sample_pairs(&cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("alpha", cfg.alpha())?;
    d.set_item("h1", pairs.iter().map(|p| p.h1).collect::<Vec<_>>())?;
    d.set_item("h2", pairs.iter().map(|p| p.h2).collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule]
fn kpztt_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(airy_ai, m)?)?;
    m.add_function(wrap_pyfunction!(tracy_widom_f2, m)?)?;
    m.add_function(wrap_pyfunction!(f2_derivs, m)?)?;
    m.add_function(wrap_pyfunction!(short_time_psi, m)?)?;
    m.add_function(wrap_pyfunction!(baik_rains_f0, m)?)?;
    m.add_function(wrap_pyfunction!(ftt, m)?)?;
    m.add_function(wrap_pyfunction!(long_time_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(long_time_fit, m)?)?;
    m.add_function(wrap_pyfunction!(short_time_check, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
