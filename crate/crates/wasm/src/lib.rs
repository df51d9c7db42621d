//! Browser bindings for the fractional Kelvin-Voigt lab.
//!
//! Each exported function builds a small operator from scratch and returns a
//! flat `Float64Array`; the page in `www/` draws the results. The plain Rust
//! functions underneath are what the tests call.

use fkv_core::assembly::{ModelKind, ModelSpec, SpatialMesh};
use fkv_core::evolution::{make_initial_data, simulate, InitialProfile};
use fkv_core::frequency::resolvent_norm;
use fkv_core::kernel::{
    build_xi_grid, closed_i1, default_xi_max, default_xi_min, FractionalParams, XiGrid, DEFAULT_QUAD_TOL,
};
use fkv_core::operator::{assemble_generator, DiscreteOperator};
use wasm_bindgen::prelude::*;

/// Largest element count per side accepted from the page.
pub const MAX_ELEMENTS: usize = 64;
pub const MAX_XI: usize = 200;
/// Diffusive nodes behind the decay and resolvent demos.
pub const DEMO_XI: usize = 80;

fn operator(model: &str, alpha: f64, eta: f64, elements: usize, n_xi: usize) -> Result<DiscreteOperator, String> {
    if !(1..=MAX_ELEMENTS).contains(&elements) {
        return Err(format!("elements must be in 1..={MAX_ELEMENTS}"));
    }
    if !(2..=MAX_XI).contains(&n_xi) {
        return Err(format!("n_xi must be in 2..={MAX_XI}"));
    }
    let kind: ModelKind = model.parse().map_err(|e: fkv_core::Error| e.to_string())?;
    let spec = ModelSpec::standard(kind);
    let params = FractionalParams::new(alpha, eta).map_err(|e| e.to_string())?;
    let xi_max = default_xi_max(&params, DEFAULT_QUAD_TOL);
    let grid = build_xi_grid(&params, n_xi, xi_max, DEFAULT_QUAD_TOL).map_err(|e| e.to_string())?;
    let mesh = SpatialMesh::fitted(&spec, elements, elements).map_err(|e| e.to_string())?;
    assemble_generator(&spec, &mesh, &grid, &params).map_err(|e| e.to_string())
}

/// `[kappa, closed I1, grid I1, relative error, xi_max]` for one grid size.
/// The grid is not checked against the tolerance, so coarse grids show their error.
pub fn kernel_probe(alpha: f64, eta: f64, n_xi: usize) -> Result<Vec<f64>, String> {
    if !(2..=MAX_XI).contains(&n_xi) {
        return Err(format!("n_xi must be in 2..={MAX_XI}"));
    }
    let params = FractionalParams::new(alpha, eta).map_err(|e| e.to_string())?;
    let xi_max = default_xi_max(&params, DEFAULT_QUAD_TOL);
    let xi_min = default_xi_min(&params, DEFAULT_QUAD_TOL);
    let grid = XiGrid::geometric(n_xi, xi_min, xi_max).map_err(|e| e.to_string())?;
    let exact = closed_i1(eta, alpha).map_err(|e| e.to_string())?;
    let approx = params.kappa() * grid.integrate_even(|xi| xi.powf(2.0 * alpha - 1.0) / (1.0 + xi * xi + eta));
    let err = ((approx - exact) / exact).abs();
    Ok(vec![params.kappa(), exact, approx, err, xi_max])
}

/// Interleaved `(t, E(t)/E(0))` pairs from a midpoint run of the low-mode profile.
pub fn energy_decay(
    model: &str,
    alpha: f64,
    eta: f64,
    elements: usize,
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>, String> {
    if !(t_end > 0.0 && dt > 0.0) || t_end / dt > 2.0e5 {
        return Err("need t_end > 0, dt > 0 and at most 2e5 steps".into());
    }
    let op = operator(model, alpha, eta, elements, DEMO_XI)?;
    let x0 = make_initial_data(&op, InitialProfile::LowMode, 0).map_err(|e| e.to_string())?;
    let steps = (t_end / dt).round() as usize;
    let every = (steps / 400).max(1);
    let trace = simulate(&op, &x0, t_end, dt, every).map_err(|e| e.to_string())?;
    let e0 = trace.energies[0];
    Ok(trace
        .times
        .iter()
        .zip(&trace.energies)
        .flat_map(|(&t, &e)| [t, e / e0])
        .collect())
}

/// Interleaved `(lambda, ||R(i lambda)||)` at `count` log-spaced frequencies.
pub fn resolvent_curve(
    model: &str,
    alpha: f64,
    eta: f64,
    elements: usize,
    lambda_lo: f64,
    lambda_hi: f64,
    count: usize,
) -> Result<Vec<f64>, String> {
    if !(lambda_lo > 0.0 && lambda_hi > lambda_lo) || !(2..=400).contains(&count) {
        return Err("need 0 < lambda_lo < lambda_hi and 2..=400 points".into());
    }
    let op = operator(model, alpha, eta, elements, DEMO_XI)?;
    let ratio = (lambda_hi / lambda_lo).ln() / (count - 1) as f64;
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let lambda = lambda_lo * (ratio * i as f64).exp();
        out.push(lambda);
        out.push(resolvent_norm(&op, lambda).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

#[wasm_bindgen(js_name = kernelProbe)]
pub fn kernel_probe_js(alpha: f64, eta: f64, n_xi: usize) -> Result<Vec<f64>, JsError> {
    kernel_probe(alpha, eta, n_xi).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = energyDecay)]
pub fn energy_decay_js(
    model: &str,
    alpha: f64,
    eta: f64,
    elements: usize,
    t_end: f64,
    dt: f64,
) -> Result<Vec<f64>, JsError> {
    energy_decay(model, alpha, eta, elements, t_end, dt).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = resolventCurve)]
pub fn resolvent_curve_js(
    model: &str,
    alpha: f64,
    eta: f64,
    elements: usize,
    lambda_lo: f64,
    lambda_hi: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    resolvent_curve(model, alpha, eta, elements, lambda_lo, lambda_hi, count).map_err(|e| JsError::new(&e))
}
