//! Independent oracles shared by the integration tests: truncated series
//! for polylogarithm derivatives and central finite differences for the
//! Wirtinger derivatives. None of these call the analytic derivative code.

#![allow(dead_code)]

use fbh_core::{Bergman, CMatrix, CVector, DomainParams, Point};
use num_complex::Complex64;

pub const FD_STEP: f64 = 1e-5;
/// Larger step for the nested second differences.
pub const FD_STEP_MIXED: f64 = 1e-4;

/// Smallest `K` with `K^n K^m |t|^{K-m} / (1 - |t|) < 1e-13`.
pub fn series_length(n: usize, m: usize, t: Complex64) -> usize {
    let r = t.norm();
    assert!(r < 1.0);
    let mut k = m + 2;
    loop {
        let kf = k as f64;
        let bound = kf.powi((n + m) as i32) * r.powi((k - m) as i32) / (1.0 - r);
        if bound < 1e-13 || r == 0.0 {
            return k;
        }
        k += 1;
    }
}

/// `sum_k k^n k!/(k-m)! t^{k-m}`: the m-times differentiated series of `Li_{-n}`.
pub fn series_derivative(n: usize, m: usize, t: Complex64) -> Complex64 {
    let len = series_length(n, m, t);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in m.max(1)..=len {
        let falling: f64 = (0..m).map(|i| (k - i) as f64).product();
        sum += t.powu((k - m) as u32) * ((k as f64).powi(n as i32) * falling);
    }
    sum
}

fn shift(p: &Point, idx: usize, delta: Complex64) -> Point {
    let mut c = p.coords();
    c[idx] += delta;
    Point::from_coords(p.z.len(), &c)
}

/// `(d/dx + i d/dy) / 2` or `(d/dx - i d/dy) / 2` of `f` at coordinate `idx`.
fn wirtinger(f: &dyn Fn(&Point) -> Complex64, p: &Point, idx: usize, conj: bool, h: f64) -> Complex64 {
    let re = (f(&shift(p, idx, Complex64::new(h, 0.0))) - f(&shift(p, idx, Complex64::new(-h, 0.0)))) / (2.0 * h);
    let im = (f(&shift(p, idx, Complex64::new(0.0, h))) - f(&shift(p, idx, Complex64::new(0.0, -h)))) / (2.0 * h);
    let i = Complex64::new(0.0, 1.0);
    if conj {
        (re + i * im) * 0.5
    } else {
        (re - i * im) * 0.5
    }
}

/// Finite-difference `grad_{conj q} log K(p, q)` from kernel values only.
pub fn fd_log_grad_wbar(b: &Bergman, p: &Point, q: &Point) -> CVector {
    let k = |qq: &Point| b.kernel(p, qq).unwrap().value;
    let k0 = k(q);
    let dim = p.z.len() + p.zeta.len();
    CVector::from_fn(dim, |i, _| wirtinger(&k, q, i, true, FD_STEP) / k0)
}

/// Finite-difference metric `d^2 log K / d conj(q_i) d p_k`, using
/// `K_{qp}/K - K_q K_p / K^2` with every derivative taken on kernel values.
pub fn fd_metric(b: &Bergman, p: &Point, q: &Point) -> CMatrix {
    let h = FD_STEP_MIXED;
    let dim = p.z.len() + p.zeta.len();
    let k0 = b.kernel(p, q).unwrap().value;
    let dq: Vec<Complex64> = (0..dim)
        .map(|i| wirtinger(&|qq: &Point| b.kernel(p, qq).unwrap().value, q, i, true, h))
        .collect();
    let dp: Vec<Complex64> = (0..dim)
        .map(|k| wirtinger(&|pp: &Point| b.kernel(pp, q).unwrap().value, p, k, false, h))
        .collect();
    CMatrix::from_fn(dim, dim, |i, k| {
        let inner = |pp: &Point| wirtinger(&|qq: &Point| b.kernel(pp, qq).unwrap().value, q, i, true, h);
        let mixed = wirtinger(&inner, p, k, false, h);
        mixed / k0 - dq[i] * dp[k] / (k0 * k0)
    })
}

/// Finite-difference holomorphic Jacobian of a point map.
pub fn fd_jacobian(f: &dyn Fn(&Point) -> Point, p: &Point) -> CMatrix {
    let dim = p.z.len() + p.zeta.len();
    let mut j = CMatrix::zeros(dim, dim);
    for row in 0..dim {
        let component = |pp: &Point| f(pp).coords()[row];
        for col in 0..dim {
            j[(row, col)] = wirtinger(&component, p, col, false, FD_STEP);
        }
    }
    j
}

pub fn max_abs_m(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_v(v: &CVector) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn point_distance(p: &Point, q: &Point) -> f64 {
    max_abs_v(&(p.coords() - q.coords()))
}

pub fn params(n: usize, m: usize, mu: f64) -> DomainParams {
    DomainParams::new(n, m, mu).unwrap()
}

/// The configurations exercised by the law checks.
pub fn law_configs() -> Vec<DomainParams> {
    let mut out = Vec::new();
    for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        for mu in [0.5, 1.0, 2.0] {
            out.push(params(n, m, mu));
        }
    }
    out
}
