//! WebAssembly bindings for the single-page demo in `www/`.
//!
//! Every export returns a flat `Float64Array`; level scans are row-major
//! (one row of `levels` energies per well position).

use bec_lz::analysis;
use bec_lz::spectrum;
use bec_lz::{Grid, PotentialParams};
use wasm_bindgen::prelude::*;

/// Half-width of the trap window shown in the page.
pub const HALF_WIDTH: f64 = 12.0;

fn grid(n: usize) -> Result<Grid, String> {
    Grid::new(-HALF_WIDTH, HALF_WIDTH, n).map_err(|e| e.to_string())
}

pub fn grid_points(n: usize) -> Result<Vec<f64>, String> {
    Ok(grid(n)?.points())
}

pub fn potential_values(u0: f64, sigma: f64, x0: f64, n: usize) -> Result<Vec<f64>, String> {
    let params = PotentialParams::new(u0, sigma, x0).map_err(|e| e.to_string())?;
    Ok(params.sample(&grid(n)?.points()))
}

pub fn level_scan(
    u0: f64,
    sigma: f64,
    x0_start: f64,
    x0_end: f64,
    points: usize,
    levels: usize,
    n: usize,
) -> Result<Vec<f64>, String> {
    let scan = spectrum::level_dynamics(&grid(n)?, u0, sigma, (x0_start, x0_end), levels, points)
        .map_err(|e| e.to_string())?;
    Ok(scan.energies.into_iter().flatten().collect())
}

pub fn density_values(p: f64, t: f64, n: usize) -> Result<Vec<f64>, String> {
    analysis::reduced_density(p, t, &grid(n)?).map_err(|e| e.to_string())
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = gridPoints)]
pub fn grid_points_js(n: usize) -> Result<Vec<f64>, JsError> {
    js(grid_points(n))
}

/// Trap plus well, `x²/2 + u0·atan(x0)·exp(−(x−x0)²/2σ²)`, on `n` points.
#[wasm_bindgen(js_name = potentialCurve)]
pub fn potential_curve_js(u0: f64, sigma: f64, x0: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(potential_values(u0, sigma, x0, n))
}

/// Lowest `levels` energies at `points` well positions between `x0_start` and `x0_end`.
#[wasm_bindgen(js_name = levelDynamics)]
pub fn level_dynamics_js(
    u0: f64,
    sigma: f64,
    x0_start: f64,
    x0_end: f64,
    points: usize,
    levels: usize,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    js(level_scan(u0, sigma, x0_start, x0_end, points, levels, n))
}

/// Density of the post-sweep superposition with excited fraction `p`, `t` after the sweep.
#[wasm_bindgen(js_name = reducedDensity)]
pub fn reduced_density_js(p: f64, t: f64, n: usize) -> Result<Vec<f64>, JsError> {
    js(density_values(p, t, n))
}
