//! wasm-bindgen exports for the single-page demo in `www/`.
//!
//! Each export is a thin wrapper over a plain function so the numerics can be
//! tested natively; only the wrappers touch JS types.

use wasm_bindgen::prelude::*;

use qgld_core::instances::{geometric_spectrum, rng_from_seed};
use qgld_core::lanczos::{assemble_and_solve, relevance_order, run_rqbl_with_factorization};
use qgld_core::numeric::presets::{
    basis, hadamard, hadamard_minus, hadamard_plus, minus, pauli_x, pauli_z, plus, projector,
};
use qgld_core::numeric::{eig_hermitian, ComplexMatrix, C64};
use qgld_core::qgpe::{qgpe_run, GradientEncoding, PerturbationDirection, Shift};

fn matrix(name: &str) -> Result<ComplexMatrix, String> {
    match name {
        "sigma-x" => Ok(pauli_x()),
        "sigma-z" => Ok(pauli_z()),
        "hadamard" => Ok(hadamard()),
        _ => Err(format!("unknown matrix {name:?}")),
    }
}

fn state(name: &str) -> Result<Vec<C64>, String> {
    match name {
        "plus" => Ok(plus()),
        "minus" => Ok(minus()),
        "h-plus" => Ok(hadamard_plus()),
        "h-minus" => Ok(hadamard_minus()),
        "e1" => Ok(basis(2, 0)),
        "e2" => Ok(basis(2, 1)),
        _ => Err(format!("unknown state {name:?}")),
    }
}

fn delta(name: &str) -> Result<ComplexMatrix, String> {
    match name {
        "x" => Ok(pauli_x()),
        "z" => Ok(pauli_z()),
        "p0" => Ok(projector(2, 0)),
        "p1" => Ok(projector(2, 1)),
        "identity" => Ok(ComplexMatrix::identity(2)),
        _ => Err(format!("unknown perturbation {name:?}")),
    }
}

/// Deviation-register distribution followed by the peak gradient.
pub fn distribution(x: &str, v: &str, d: &str, l: f64, m: u32, w: f64) -> Result<Vec<f64>, String> {
    let enc = GradientEncoding::new(l, w, m, Shift::Centered, false).map_err(|e| e.to_string())?;
    let d = PerturbationDirection::custom(delta(d)?).map_err(|e| e.to_string())?;
    let out = qgpe_run(&matrix(x)?, &state(v)?, &d, &enc).map_err(|e| e.to_string())?;
    let mut data = out.distribution;
    data.push(out.peak_gradient);
    Ok(data)
}

/// Rows of [s, λ₁(X + sΔ), λ₂(X + sΔ)] for s evenly spaced in [−range, range].
pub fn sweep(x: &str, d: &str, range: f64, points: usize) -> Result<Vec<f64>, String> {
    if !(range > 0.0 && range.is_finite()) || !(2..=2001).contains(&points) {
        return Err("range must be positive and points in [2, 2001]".into());
    }
    let (x, d) = (matrix(x)?, delta(d)?);
    let mut out = Vec::with_capacity(points * 3);
    for i in 0..points {
        let s = -range + 2.0 * range * i as f64 / (points - 1) as f64;
        let shifted = &x + &d.scale_real(s);
        let eig = eig_hermitian(&shifted).map_err(|e| e.to_string())?;
        out.push(s);
        out.extend(eig.values);
    }
    Ok(out)
}

/// Top Ritz value error after each block Lanczos step on an n×n matrix with
/// spectrum 2^{−i}.
pub fn convergence(n: usize, b: usize, k: usize, seed: u64) -> Result<Vec<f64>, String> {
    if !(2..=256).contains(&n) || b == 0 || k == 0 || k * b > n {
        return Err("need 2 <= n <= 256, b >= 1, k >= 1 and k*b <= n".into());
    }
    let x = geometric_spectrum(n, &mut rng_from_seed(seed));
    let dense = eig_hermitian(&x).map_err(|e| e.to_string())?.values;
    let exact = dense[relevance_order(&dense)[0]];
    let (_, f) = run_rqbl_with_factorization(&x, b, k, seed).map_err(|e| e.to_string())?;
    (1..=f.steps())
        .map(|s| {
            let ritz = assemble_and_solve(&x, &f.truncated(s)).map_err(|e| e.to_string())?;
            Ok((ritz.values[relevance_order(&ritz.values)[0]] - exact).abs())
        })
        .collect()
}

#[wasm_bindgen]
pub fn qgpe_distribution(x: &str, v: &str, d: &str, l: f64, m: u32, w: f64) -> Result<Vec<f64>, JsError> {
    distribution(x, v, d, l, m, w).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn eigen_sweep(x: &str, d: &str, range: f64, points: usize) -> Result<Vec<f64>, JsError> {
    sweep(x, d, range, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn lanczos_convergence(n: usize, b: usize, k: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    convergence(n, b, k, seed).map_err(|e| JsError::new(&e))
}
