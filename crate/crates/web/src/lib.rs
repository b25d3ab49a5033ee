//! Browser bindings. Every export returns a flat `Float64Array`; the plain
//! functions below them are what the page calls through `wasm-bindgen` and
//! what the native tests exercise.

use std::f64::consts::PI;

use strip_spectrum::{critical_lengths, Geometry, ModeBasis, SolveOptions};
use strip_spectrum::matching::{eigenfunction_with_basis, NULL_RESIDUAL_LIMIT};
use strip_spectrum::spectrum::discrete_spectrum_with;
use wasm_bindgen::prelude::*;

/// Triples `(l, m, lambda)` for `steps` window lengths evenly spaced on
/// `[l_min, l_max]`.
pub fn curves(d: f64, l_min: f64, l_max: f64, steps: usize, n_modes: usize) -> Result<Vec<f64>, String> {
    if !(l_min > 0.0 && l_max > l_min) || steps < 2 {
        return Err("need 0 < l_min < l_max and at least two steps".into());
    }
    let g = Geometry::new(d, l_min).map_err(|e| e.to_string())?;
    let basis = ModeBasis::new(&g, n_modes).map_err(|e| e.to_string())?;
    let opts = SolveOptions::with_tol(1e-9);
    let mut out = Vec::new();
    for i in 0..steps {
        let l = l_min + (l_max - l_min) * i as f64 / (steps - 1) as f64;
        let s = discrete_spectrum_with(&basis, l, &opts).map_err(|e| e.to_string())?;
        for p in s.points {
            out.extend([l, p.m as f64, p.lambda]);
        }
    }
    Ok(out)
}

/// `[lambda, k, x1_half, v_00, v_01, ...]` with the field sampled on an
/// `nx x ny` grid over `|x1| <= x1_half`, `-d <= x2 <= pi`, row by row
/// from the top.
pub fn field(d: f64, l: f64, m: usize, n_modes: usize, x1_half: f64, nx: usize, ny: usize) -> Result<Vec<f64>, String> {
    if nx < 2 || ny < 2 || !(x1_half > 0.0) {
        return Err("grid needs at least 2 x 2 points and a positive extent".into());
    }
    let g = Geometry::new(d, l).map_err(|e| e.to_string())?;
    let basis = ModeBasis::new(&g, n_modes).map_err(|e| e.to_string())?;
    let s = discrete_spectrum_with(&basis, l, &SolveOptions::with_tol(1e-11)).map_err(|e| e.to_string())?;
    let p = s
        .points
        .iter()
        .find(|p| p.m == m)
        .ok_or_else(|| format!("no eigenvalue with index {m} at l = {l}"))?;
    let ef = eigenfunction_with_basis(&basis, l, p, NULL_RESIDUAL_LIMIT).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 + nx * ny);
    out.extend([p.lambda, p.k, x1_half]);
    for j in 0..ny {
        let x2 = PI - (PI + d) * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let x1 = -x1_half + 2.0 * x1_half * i as f64 / (nx - 1) as f64;
            out.push(ef.field.value(x1, x2).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// `[l_1 = 0, l_2, ..., l_{n_max}]`.
pub fn critical(d: f64, n_max: usize, n_modes: usize) -> Result<Vec<f64>, String> {
    critical_lengths(d, n_max, n_modes, 1e-10).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn spectrum_curves(d: f64, l_min: f64, l_max: f64, steps: usize, n_modes: usize) -> Result<Vec<f64>, JsError> {
    curves(d, l_min, l_max, steps, n_modes).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn eigenfunction_field(
    d: f64,
    l: f64,
    m: usize,
    n_modes: usize,
    x1_half: f64,
    nx: usize,
    ny: usize,
) -> Result<Vec<f64>, JsError> {
    field(d, l, m, n_modes, x1_half, nx, ny).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = critical_lengths)]
pub fn critical_lengths_js(d: f64, n_max: usize, n_modes: usize) -> Result<Vec<f64>, JsError> {
    critical(d, n_max, n_modes).map_err(|e| JsError::new(&e))
}
