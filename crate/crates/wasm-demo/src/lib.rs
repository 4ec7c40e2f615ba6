//! Browser bindings for the demo page in `www/`.
//!
//! Three operations are exposed: the exact `A_{n,m}` coefficients, a
//! heat-map of `log10 K(p, p)` over a real slice of the domain, and the
//! image of a point cloud under an automorphism of `D_{1,1}`.

use fbh_core::autgroup::{apply, Automorphism};
use fbh_core::domain::{defect, sample_interior};
use fbh_core::{Bergman, CMatrix, CVector, DomainParams, Point};
use num_complex::Complex64;
use wasm_bindgen::prelude::*;

/// Coefficients of `A_{n,m}` as CSV, lowest degree first.
pub fn a_poly_csv_inner(n: usize, m: usize) -> Result<String, String> {
    let p = fbh_core::a_poly(n, m).map_err(|e| e.to_string())?;
    Ok(p.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>().join(","))
}

/// `log10 K(p, p)` on the grid `p = (x e_1, y e_1)`, `x` in `[-extent, extent]`
/// and `y` in `[0, 1]`, row-major with `y` increasing downward.
/// Exterior and near-boundary cells are `NaN`.
pub fn kernel_slice_inner(
    n: usize,
    m: usize,
    mu: f64,
    width: usize,
    height: usize,
    extent: f64,
) -> Result<Vec<f64>, String> {
    let params = DomainParams::new(n, m, mu).map_err(|e| e.to_string())?;
    let b = Bergman::new(&params).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(width * height);
    for row in 0..height {
        let y = row as f64 / (height.max(2) - 1) as f64;
        for col in 0..width {
            let x = -extent + 2.0 * extent * col as f64 / (width.max(2) - 1) as f64;
            let mut p = Point::origin(&params);
            p.z[0] = Complex64::new(x, 0.0);
            p.zeta[0] = Complex64::new(y, 0.0);
            let inside = defect(&params, &p).map(|d| d > 0.0).unwrap_or(false);
            let v = if inside {
                b.kernel(&p, &p).map(|k| k.value.re.log10()).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            out.push(v);
        }
    }
    Ok(out)
}

/// Samples `count` interior points of `D_{1,1}` and maps them by
/// `(z, zeta) -> (e^{i theta} z + v, s(z) e^{i theta'} zeta)`.
/// Returns `[x, y, r, x', y', r']` per point, where `r = |zeta| / exp(-mu |z|^2 / 2)`
/// is the relative fibre radius.
pub fn orbit_inner(
    mu: f64,
    v_re: f64,
    v_im: f64,
    theta: f64,
    theta_prime: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let params = DomainParams::new(1, 1, mu).map_err(|e| e.to_string())?;
    let phase = |t: f64| CMatrix::from_element(1, 1, Complex64::from_polar(1.0, t));
    let a = Automorphism::new(
        &params,
        phase(theta),
        phase(theta_prime),
        CVector::from_element(1, Complex64::new(v_re, v_im)),
    )
    .map_err(|e| e.to_string())?;
    let rel_radius = |p: &Point| p.zeta[0].norm() / (-0.5 * mu * p.z[0].norm_sqr()).exp();
    let mut out = Vec::with_capacity(count * 6);
    for p in sample_interior(&params, seed, count) {
        let q = apply(&params, &a, &p).map_err(|e| e.to_string())?;
        out.extend([p.z[0].re, p.z[0].im, rel_radius(&p), q.z[0].re, q.z[0].im, rel_radius(&q)]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn a_poly_csv(n: usize, m: usize) -> Result<String, JsError> {
    a_poly_csv_inner(n, m).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn kernel_slice(n: usize, m: usize, mu: f64, width: usize, height: usize, extent: f64) -> Result<Vec<f64>, JsError> {
    kernel_slice_inner(n, m, mu, width, height, extent).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn orbit(
    mu: f64,
    v_re: f64,
    v_im: f64,
    theta: f64,
    theta_prime: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    orbit_inner(mu, v_re, v_im, theta, theta_prime, count, seed).map_err(|e| JsError::new(&e))
}
