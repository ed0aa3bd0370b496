//! JavaScript bindings. Results are flat `Float64Array`s; the layout of each
//! is given on the function and unpacked in `www/index.html`.

use wasm_bindgen::prelude::*;

fn js(e: deltakick::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `[strength, T_before µK, T_after µK, n, x_before…, v_before…, x_after…, v_after…]`
#[wasm_bindgen(js_name = kickView)]
pub fn kick_view(
    temperature_uk: f64,
    radius_mm: f64,
    t_f_ms: f64,
    strength_factor: f64,
    quadrupole: bool,
    atoms: usize,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    let v = crate::kick_view(temperature_uk, radius_mm, t_f_ms, strength_factor, quadrupole, atoms, u64::from(seed)).map_err(js)?;
    let mut out = vec![v.strength, v.temperature_before * 1e6, v.temperature_after * 1e6, v.before.0.len() as f64];
    for part in [&v.before.0, &v.before.1, &v.after.0, &v.after.1] {
        out.extend_from_slice(part);
    }
    Ok(out)
}

/// `[T_fit µK, T_err µK, σ0 mm, n, times…, sizes…, errors…]`
#[wasm_bindgen(js_name = expansionView)]
pub fn expansion_view(temperature_uk: f64, radius_mm: f64, last_delay_ms: f64, points: usize, atoms: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    let v = crate::expansion_view(temperature_uk, radius_mm, last_delay_ms, points, atoms, u64::from(seed)).map_err(js)?;
    let mut out = vec![v.fit_temperature_uk, v.fit_error_uk, v.fit_size_mm, v.times_ms.len() as f64];
    for part in [&v.times_ms, &v.sizes_mm, &v.errors_mm] {
        out.extend_from_slice(part);
    }
    Ok(out)
}

/// `[well bottom nK, well rim nK, points, levels, x…, V…, level energies…]`;
/// bottom and rim are NaN without a well.
#[wasm_bindgen(js_name = wellView)]
pub fn well_view(barrier_nk: f64, waist_um: f64, centre_um: f64) -> Result<Vec<f64>, JsError> {
    let v = crate::well_view(barrier_nk, waist_um, centre_um).map_err(js)?;
    let (lo, hi) = v.well_nk.unwrap_or((f64::NAN, f64::NAN));
    let mut out = vec![lo, hi, v.x_um.len() as f64, v.levels_nk.len() as f64];
    for part in [&v.x_um, &v.potential_nk, &v.levels_nk] {
        out.extend_from_slice(part);
    }
    Ok(out)
}
