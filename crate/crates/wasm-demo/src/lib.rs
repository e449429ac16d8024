//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every export returns a JSON string. The plain functions in [`demo`] do the
//! work and are what the native tests call.

use wasm_bindgen::prelude::*;

pub mod demo;

fn to_js(r: stator::Result<serde_json::Value>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

/// Optimized and dyadic cost per unit angle on `points` log-spaced angles in
/// `[1e-6, π/4]`.
#[wasm_bindgen(js_name = costCurve)]
pub fn cost_curve(points: usize) -> Result<String, JsError> {
    to_js(demo::cost_curve(points))
}

/// Optimal stage schedule for one angle.
#[wasm_bindgen]
pub fn optimize(alpha: f64) -> Result<String, JsError> {
    to_js(demo::optimize(alpha))
}

/// Sampled runs of the optimized protocol on random states.
#[wasm_bindgen]
pub fn simulate(alpha: f64, parties: usize, runs: usize, seed: u64) -> Result<String, JsError> {
    to_js(demo::simulate(alpha, parties, runs, seed))
}
