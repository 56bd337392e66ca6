//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Sketches cross the boundary as JSON strings in the JSONL line format.
//! The `api` functions are plain Rust so they can be tested natively.

use wasm_bindgen::prelude::*;

pub mod api {
    use sketchgraph::cpt::{generate_cpt, generate_rotated, generate_synthetic, CptConfig};
    use sketchgraph::raster::{render_handdrawn_sized, render_sized, HanddrawConfig};
    use sketchgraph::solver::dof_estimate;
    use sketchgraph::SketchGraph;

    fn parse(json: &str) -> Result<SketchGraph, String> {
        serde_json::from_str(json).map_err(|e| format!("bad sketch JSON: {e}"))
    }

    /// Row-major `size × size` grayscale bytes (0 or 255).
    pub fn render(json: &str, size: usize, handdrawn: bool, seed: u64) -> Result<Vec<u8>, String> {
        if !(1..=2048).contains(&size) {
            return Err(format!("size must be in 1..=2048, got {size}"));
        }
        let s = parse(json)?;
        let img = if handdrawn {
            render_handdrawn_sized(&s, &HanddrawConfig { seed, ..HanddrawConfig::default() }, size, size)
        } else {
            render_sized(&s, size, size)
        };
        img.map(|i| i.to_gray8()).map_err(|e| e.to_string())
    }

    /// CPT result as JSON: `{sketch, accepted, reason, max_residual}`.
    pub fn cpt(json: &str, seed: u64, rounds: usize, alpha: f64) -> Result<String, String> {
        let cfg = CptConfig { seed, rounds, alpha, ..CptConfig::default() };
        let r = generate_cpt(&parse(json)?, &cfg).map_err(|e| e.to_string())?;
        Ok(serde_json::to_string(&r).expect("result serializes"))
    }

    /// Rotation result as JSON: `{sketch, dropped}`.
    pub fn rotate(json: &str, angle: f64) -> Result<String, String> {
        if !angle.is_finite() {
            return Err("angle must be finite".into());
        }
        Ok(serde_json::to_string(&generate_rotated(&parse(json)?, angle)).expect("result serializes"))
    }

    pub fn synthetic(seed: u64, n: usize) -> String {
        serde_json::to_string(&generate_synthetic(seed, n)).expect("sketch serializes")
    }

    pub fn dof(json: &str) -> Result<usize, String> {
        dof_estimate(&parse(json)?).map_err(|e| e.to_string())
    }
}

fn js(r: Result<impl Into<JsValue>, String>) -> Result<JsValue, JsError> {
    r.map(Into::into).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn render(json: &str, size: usize, handdrawn: bool, seed: u64) -> Result<Vec<u8>, JsError> {
    api::render(json, size, handdrawn, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn cpt(json: &str, seed: u64, rounds: usize, alpha: f64) -> Result<JsValue, JsError> {
    js(api::cpt(json, seed, rounds, alpha))
}

#[wasm_bindgen]
pub fn rotate(json: &str, angle: f64) -> Result<JsValue, JsError> {
    js(api::rotate(json, angle))
}

#[wasm_bindgen]
pub fn synthetic(seed: u64, n: usize) -> String {
    api::synthetic(seed, n)
}

#[wasm_bindgen]
pub fn dof(json: &str) -> Result<usize, JsError> {
    api::dof(json).map_err(|e| JsError::new(&e))
}
