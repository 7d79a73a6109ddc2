//! Browser bindings for the static demo page in `www/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use wasm_bindgen::prelude::*;

use fracwalk::diagnostics::lattice_error;
use fracwalk::kernels::{
    build_kernel, coeff_bound, default_radius, default_tail_tol, CoeffName, ModelTag,
};
use fracwalk::lattice::default_half_width;
use fracwalk::stable::{cauchy_pdf, gauss_pdf, stable_density_rotated};
use fracwalk::{LatticeState, StableParams};

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn density(p: &StableParams, x: f64) -> f64 {
    match p.alpha() {
        1.0 => cauchy_pdf(x, p.t()),
        2.0 => gauss_pdf(x, p.t()),
        _ => stable_density_rotated(p, x),
    }
}

fn model_tag(model: &str) -> Result<(ModelTag, CoeffName), JsError> {
    match model {
        "gl" => Ok((ModelTag::GrunwaldLetnikov, CoeffName::Mu)),
        "gw" => Ok((ModelTag::GillisWeiss, CoeffName::Lambda)),
        "binom" => Ok((ModelTag::GloballyBinomial, CoeffName::Mu)),
        other => Err(JsError::new(&format!("unknown model {other:?}"))),
    }
}

/// Density of the symmetric stable law on `points` equally spaced x in [-x_max, x_max].
#[wasm_bindgen]
pub fn stable_density_curve(
    alpha: f64,
    t: f64,
    x_max: f64,
    points: usize,
) -> Result<Vec<f64>, JsError> {
    let p = StableParams::new(alpha, t).map_err(js)?;
    if points < 2 || !(x_max > 0.0) {
        return Err(JsError::new("need points >= 2 and x_max > 0"));
    }
    let dx = 2.0 * x_max / (points - 1) as f64;
    Ok((0..points)
        .map(|i| density(&p, -x_max + i as f64 * dx))
        .collect())
}

/// Largest admissible coefficient (mu for gl/binom, lambda for gw).
#[wasm_bindgen]
pub fn coefficient_bound(model: &str, alpha: f64) -> Result<f64, JsError> {
    let (tag, name) = model_tag(model)?;
    coeff_bound(tag, alpha, name).map_err(js)
}

/// p_0, p_1, ..., p_K followed by the tail mass beyond K.
#[wasm_bindgen]
pub fn kernel_probs(
    model: &str,
    alpha: f64,
    coeff: f64,
    radius: usize,
) -> Result<Vec<f64>, JsError> {
    let (tag, name) = model_tag(model)?;
    let k = build_kernel(tag, alpha, name, coeff, radius).map_err(js)?;
    let mut out = k.one_sided().to_vec();
    out.push(k.tail_mass());
    Ok(out)
}

/// Evolves a delta start to time t and returns rows [x, y/h, g(x, t_n)]
/// flattened, followed by [t_n, l1 error].
#[wasm_bindgen]
pub fn lattice_vs_target(
    model: &str,
    alpha: f64,
    coeff: f64,
    h: f64,
    t: f64,
) -> Result<Vec<f64>, JsError> {
    let (tag, name) = model_tag(model)?;
    let radius =
        default_radius(tag, alpha, coeff, name, default_tail_tol(tag).max(1e-5)).map_err(js)?;
    let k = build_kernel(tag, alpha, name, coeff, radius.min(4096)).map_err(js)?;
    let tau = k.scaling_law().and_then(|l| l.tau(h)).map_err(js)?;
    let n = (t / tau).round();
    if !(n >= 1.0) || n > 1e5 {
        return Err(JsError::new(&format!(
            "{n} steps requested; choose h and t for 1..=100000"
        )));
    }
    let half = default_half_width(alpha, t, h, k.radius()).min(20_000);
    let mut s = LatticeState::init_delta(h, tau, (-half, half)).map_err(js)?;
    s.evolve(&k, n as u64);
    let tn = s.time();
    let p = StableParams::new(alpha, tn).map_err(js)?;
    let view = (3.0 * tn.powf(1.0 / alpha)).max(4.0 * h);
    let mut out = Vec::new();
    for (x, y) in s.lattice_profile() {
        if x.abs() <= view {
            out.extend_from_slice(&[x, y, density(&p, x)]);
        }
    }
    let l1 = lattice_error(&s, &p).map_err(js)?.l1;
    out.extend_from_slice(&[tn, l1]);
    Ok(out)
}
