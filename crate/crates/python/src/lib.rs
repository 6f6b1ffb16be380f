//! Python bindings for a small, stable slice of `kicked-core`.
//!
//! Errors surface as `ValueError` carrying the library message.

use std::sync::Arc;

use kicked_core::hamiltonian::{top_flow, top_time_reversal, SphereKick, SpherePoint};
use kicked_core::hyperbolic::{parabolic_form, r_infinity, FuchsianGroup, QuasiMorphism, UHPoint, DEFAULT_TOL};
use kicked_core::moebius::{evolve_matrix, unipotent_kicks, Mat2};
use kicked_core::sequential::KickSchedule;
use kicked_core::torus::{self, random_kicks, torus_system, zero_kicks, FrequencyVector, TorusVector};
use kicked_core::KickedError;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: KickedError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Weyl sum `(re, im, abs)` of a kicked Kronecker orbit started at 0.
#[pyfunction]
#[pyo3(signature = (omega, tau, h, n, kicks = "random", seed = 0))]
fn weyl_sum(omega: Vec<f64>, tau: f64, h: Vec<i64>, n: u64, kicks: &str, seed: u64) -> PyResult<(f64, f64, f64)> {
    let d = omega.len();
    let schedule = match kicks {
        "random" => random_kicks(d, seed),
        "zero" => zero_kicks(d),
        other => return Err(PyValueError::new_err(format!("kicks must be random or zero, got {other:?}"))),
    };
    let freq = FrequencyVector::asserted_generic(omega).map_err(err)?;
    let sys = torus_system(freq, tau, schedule).map_err(err)?;
    let s = torus::weyl_sum(&h, &sys, &TorusVector::zero(d), n).map_err(err)?;
    Ok((s.re, s.im, s.abs))
}

/// One-dimensional star discrepancy of points in [0, 1).
#[pyfunction]
fn star_discrepancy(values: Vec<f64>) -> PyResult<f64> {
    torus::star_discrepancy(&values).map_err(err)
}

/// `f^(k)(τ)` for lower-unipotent kicks with coefficients `c` (cycled), as `(a, b, c, d)`.
/// An empty `c` means identity kicks.
#[pyfunction]
fn evolve_unipotent(c: Vec<f64>, tau: f64, k: u64) -> PyResult<(f64, f64, f64, f64)> {
    let kicks = if c.is_empty() {
        KickSchedule::constant(Mat2::IDENTITY)
    } else {
        unipotent_kicks(&c).map_err(err)?
    };
    let g = evolve_matrix(&kicks, tau, k).map_err(err)?;
    Ok((g.a, g.b, g.c, g.d))
}

/// Top flow for time `t`; the input is normalized onto the sphere.
#[pyfunction]
fn top_flow_point(t: f64, p: [f64; 3]) -> PyResult<[f64; 3]> {
    Ok(top_flow(t, &SpherePoint::new(p).map_err(err)?).0)
}

/// Max deviation of θ h^t θ⁻¹ from h^{-t}, and the PASS flag, for a named θ.
#[pyfunction]
fn top_time_reversal_check(theta: &str, t_samples: Vec<f64>, points: Vec<[f64; 3]>) -> PyResult<(f64, bool)> {
    let kick = match theta {
        "mirror-z" => SphereKick::mirror_z(),
        "half-turn-x" => SphereKick::half_turn_x(),
        other => return Err(PyValueError::new_err(format!("unknown theta {other:?}"))),
    };
    let pts = points.into_iter().map(SpherePoint::new).collect::<Result<Vec<_>, _>>().map_err(err)?;
    let rep = top_time_reversal(&kick, &t_samples, &pts);
    Ok((rep.max_deviation, rep.pass))
}

/// `r(Tⁿ)` for n = 1..=n_max on PSL(2,Z) with the cusp form, plus the homogenization.
#[pyfunction]
#[pyo3(signature = (n_max, y0 = 2.5, y1 = 3.0, word_cap = 6))]
fn parabolic_r(n_max: u32, y0: f64, y1: f64, word_cap: usize) -> PyResult<(Vec<f64>, f64)> {
    let s = Mat2::new(0.0, -1.0, 1.0, 0.0).map_err(err)?;
    let group = Arc::new(FuchsianGroup::with_labels(&[('T', Mat2::horocycle(1.0)), ('S', s)]).map_err(err)?);
    let form = parabolic_form(group.clone(), y0, y1, word_cap).map_err(err)?;
    let qm = QuasiMorphism::new(form, UHPoint::new(0.0, y1).map_err(err)?, DEFAULT_TOL).map_err(err)?;
    let t = group.parse_word("T").map_err(err)?;
    let vals: Vec<f64> = qm.powers(&t, n_max).map_err(err)?.iter().map(|v| v.value).collect();
    let rinf = r_infinity(&vals, qm.defect_bound()).map_err(err)?;
    Ok((vals, rinf.estimate))
}

#[pymodule]
fn kicked(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(weyl_sum, m)?)?;
    m.add_function(wrap_pyfunction!(star_discrepancy, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_unipotent, m)?)?;
    m.add_function(wrap_pyfunction!(top_flow_point, m)?)?;
    m.add_function(wrap_pyfunction!(top_time_reversal_check, m)?)?;
    m.add_function(wrap_pyfunction!(parabolic_r, m)?)?;
    Ok(())
}
