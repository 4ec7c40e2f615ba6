//! Bergman kernel of `D_{n,m}` and the objects built from it.
//!
//! With `p = (z, zeta)`, `q = (w, eta)`, `s = <z, w>`, `t = exp(mu s) <zeta, eta>`:
//!
//! ```text
//! K(p, q) = mu^n / pi^{n+m} * exp(m mu s) * F_m(t),    F_j = d^j/dt^j Li_{-n}
//! ```
//!
//! `K` is holomorphic in `p` and anti-holomorphic in `q`. Derivatives are
//! Wirtinger derivatives: `d/dz` treats `conj(z)` as constant. The metric
//! entry `(i, k)` is `d^2 log K / d conj(q_i) d p_k`, so rows are indexed by
//! the second argument and columns by the first.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::autgroup::{jacobian, Automorphism};
use crate::domain::{norm_sqr, DomainParams, Point};
use crate::error::{Error, Result};
use crate::polylog::DerivativeLadder;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Eigenvalue floor for positive-definiteness checks.
pub const EIGEN_FLOOR: f64 = 1e-10;
/// Max deviation from Hermitian symmetry accepted by [`sqrt_pd`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// `|K|` below this is treated as a zero of the kernel.
pub const KERNEL_ZERO: f64 = 1e-300;

const ORIGIN_TOLERANCE: f64 = 1e-12;

/// `sum_i u_i conj(w_i)`, linear in the first slot.
pub fn inner(u: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    if u.len() != w.len() {
        return Err(Error::DimensionMismatch {
            what: "inner product operands",
            expected: u.len(),
            got: w.len(),
        });
    }
    Ok(u.iter().zip(w).map(|(a, b)| a * b.conj()).sum())
}

/// A kernel value together with the polylogarithm argument it was taken at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub t_arg: Complex64,
}

struct PairTerms {
    /// `exp(mu <z, w>)`
    e: Complex64,
    t: Complex64,
    f0: Complex64,
}

/// Kernel evaluator for fixed `(n, m, mu)`. Holds the float numerators of
/// `F_m, F_{m+1}, F_{m+2}`; cheap to clone and safe to share.
#[derive(Debug, Clone)]
pub struct Bergman {
    params: DomainParams,
    ladder: DerivativeLadder,
    prefactor: f64,
}

impl Bergman {
    pub fn new(params: &DomainParams) -> Result<Self> {
        let ladder = DerivativeLadder::new(params.n, params.m, 2)?;
        let prefactor = params.mu.powi(params.n as i32) / PI.powi(params.dim() as i32);
        Ok(Bergman {
            params: *params,
            ladder,
            prefactor,
        })
    }

    pub fn params(&self) -> &DomainParams {
        &self.params
    }

    fn terms(&self, p: &Point, q: &Point) -> Result<PairTerms> {
        p.check(&self.params)?;
        q.check(&self.params)?;
        let s = inner(&p.z, &q.z)?;
        let e = (s * self.params.mu).exp();
        let t = e * inner(&p.zeta, &q.zeta)?;
        let f0 = self.ladder.eval(0, t)?;
        Ok(PairTerms { e, t, f0 })
    }

    fn value_from(&self, terms: &PairTerms) -> Complex64 {
        terms.e.powu(self.params.m as u32) * terms.f0 * self.prefactor
    }

    pub fn kernel(&self, p: &Point, q: &Point) -> Result<KernelValue> {
        let terms = self.terms(p, q)?;
        Ok(KernelValue {
            value: self.value_from(&terms),
            t_arg: terms.t,
        })
    }

    fn nonzero(&self, terms: &PairTerms) -> Result<()> {
        let modulus = self.value_from(terms).norm();
        if modulus < KERNEL_ZERO || terms.f0.norm() == 0.0 {
            return Err(Error::KernelZero { modulus });
        }
        Ok(())
    }

    /// `grad_{conj q} log K(p, q)`.
    pub fn log_grad_wbar(&self, p: &Point, q: &Point) -> Result<CVector> {
        let terms = self.terms(p, q)?;
        self.nonzero(&terms)?;
        let g = self.ladder.eval(1, terms.t)? / terms.f0;
        let (n, mu) = (self.params.n, self.params.mu);
        let mf = self.params.m as f64;
        let z_part = p.z.iter().map(|&z| z * (mf * mu) + g * mu * z * terms.t);
        let zeta_part = p.zeta.iter().map(|&zeta| g * terms.e * zeta);
        Ok(CVector::from_iterator(
            n + self.params.m,
            z_part.chain(zeta_part),
        ))
    }

    /// `T(p, q)` with entry `(i, k) = d^2 log K / d conj(q_i) d p_k`.
    pub fn metric(&self, p: &Point, q: &Point) -> Result<CMatrix> {
        let terms = self.terms(p, q)?;
        self.nonzero(&terms)?;
        let (n, m, mu) = (self.params.n, self.params.m, self.params.mu);
        let dim = n + m;
        let f1 = self.ladder.eval(1, terms.t)?;
        let f2 = self.ladder.eval(2, terms.t)?;
        let g = f1 / terms.f0;
        let dg = f2 / terms.f0 - g * g;
        let (e, t) = (terms.e, terms.t);

        // dt/d conj(q_i) and dt/d p_k
        let a: Vec<Complex64> = p
            .z
            .iter()
            .map(|&z| z * t * mu)
            .chain(p.zeta.iter().map(|&zeta| zeta * e))
            .collect();
        let b: Vec<Complex64> = q
            .z
            .iter()
            .map(|w| w.conj() * t * mu)
            .chain(q.zeta.iter().map(|eta| eta.conj() * e))
            .collect();

        Ok(CMatrix::from_fn(dim, dim, |i, k| {
            let second = match (i < n, k < n) {
                (true, true) => {
                    let diag = if i == k { t * mu } else { Complex64::new(0.0, 0.0) };
                    diag + p.z[i] * q.z[k].conj() * t * mu * mu
                }
                (true, false) => p.z[i] * e * q.zeta[k - n].conj() * mu,
                (false, true) => q.z[k].conj() * e * p.zeta[i - n] * mu,
                (false, false) => {
                    if i == k {
                        e
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                }
            };
            let base = if i == k && i < n {
                Complex64::new(m as f64 * mu, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            base + g * second + dg * a[i] * b[k]
        }))
    }

    /// Closed form `T(0,0) = diag(m mu I_n, (A_{n,m+1}(0) / A_{n,m}(0)) I_m)`.
    pub fn metric_origin(&self) -> CMatrix {
        let (n, m) = (self.params.n, self.params.m);
        let ratio = self.ladder.at_zero(1) / self.ladder.at_zero(0);
        let zz = m as f64 * self.params.mu;
        CMatrix::from_fn(n + m, n + m, |i, k| match (i == k, i < n) {
            (true, true) => Complex64::new(zz, 0.0),
            (true, false) => Complex64::new(ratio, 0.0),
            _ => Complex64::new(0.0, 0.0),
        })
    }

    /// `sigma_0(p) = T(0,0)^{-1/2} grad_{conj w} log(K(p, w) / K(0, w))` at `w = 0`.
    pub fn representative_map(&self, p: &Point) -> Result<CVector> {
        let origin = Point::origin(&self.params);
        let grad = self.log_grad_wbar(p, &origin)? - self.log_grad_wbar(&origin, &origin)?;
        let t00 = self.metric(&origin, &origin)?;
        Ok(inv_sqrt_pd(&t00)? * grad)
    }

    /// `L(phi, 0) = T(0,0)^{-1/2} (J(phi,0)^H)^{-1} T(0,0)^{1/2}` for an
    /// origin-fixing `phi`.
    pub fn l_matrix(&self, phi: &Automorphism) -> Result<CMatrix> {
        let norm = norm_sqr(phi.v.as_slice()).sqrt();
        if norm > ORIGIN_TOLERANCE {
            return Err(Error::DoesNotFixOrigin { norm });
        }
        let origin = Point::origin(&self.params);
        let t00 = self.metric(&origin, &origin)?;
        let j = jacobian(&self.params, phi, &origin)?;
        let jh_inv = j.adjoint().try_inverse().ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: 0.0,
        })?;
        Ok(inv_sqrt_pd(&t00)? * jh_inv * sqrt_pd(&t00)?)
    }
}

pub fn kernel(params: &DomainParams, p: &Point, q: &Point) -> Result<KernelValue> {
    Bergman::new(params)?.kernel(p, q)
}

pub fn log_kernel_grad_wbar(params: &DomainParams, p: &Point, q: &Point) -> Result<CVector> {
    Bergman::new(params)?.log_grad_wbar(p, q)
}

pub fn metric(params: &DomainParams, p: &Point, q: &Point) -> Result<CMatrix> {
    Bergman::new(params)?.metric(p, q)
}

pub fn representative_map(params: &DomainParams, p: &Point) -> Result<CVector> {
    Bergman::new(params)?.representative_map(p)
}

pub fn l_matrix(params: &DomainParams, phi: &Automorphism) -> Result<CMatrix> {
    Bergman::new(params)?.l_matrix(phi)
}

/// Largest entry modulus of `m - m^H`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn pd_eigen(m: &CMatrix) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            what: "square matrix",
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let deviation = hermitian_deviation(m);
    if deviation > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { deviation });
    }
    let eig = SymmetricEigen::new(m.clone());
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eigenvalue <= EIGEN_FLOOR {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    Ok(eig)
}

fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let eig = pd_eigen(m)?;
    let vecs = &eig.eigenvectors;
    let scaled = CMatrix::from_fn(m.nrows(), m.ncols(), |i, k| {
        vecs[(i, k)] * f(eig.eigenvalues[k])
    });
    let out = scaled * vecs.adjoint();
    // Exactly Hermitian output.
    Ok((&out + out.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Hermitian positive-definite square root.
pub fn sqrt_pd(m: &CMatrix) -> Result<CMatrix> {
    spectral_map(m, f64::sqrt)
}

/// Inverse of [`sqrt_pd`].
pub fn inv_sqrt_pd(m: &CMatrix) -> Result<CMatrix> {
    spectral_map(m, |x| 1.0 / x.sqrt())
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::sample_interior;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(n: usize, m: usize, mu: f64) -> DomainParams {
        DomainParams::new(n, m, mu).unwrap()
    }

    #[test]
    fn inner_convention() {
        assert_eq!(inner(&[c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap(), c(1.0, 0.0));
        assert_eq!(inner(&[c(0.0, 1.0)], &[c(1.0, 0.0)]).unwrap(), c(0.0, 1.0));
        let u = [c(0.3, -1.2), c(2.0, 0.5)];
        let w = [c(-0.7, 0.1), c(0.4, 0.9)];
        let d = inner(&u, &w).unwrap() - inner(&w, &u).unwrap().conj();
        assert!(d.norm() < 1e-15);
        assert!(inner(&u, &w[..1]).is_err());
        assert!((inner(&u, &u).unwrap().re - norm_sqr(&u)).abs() < 1e-15);
    }

    #[test]
    fn kernel_at_origin() {
        let pr = params(1, 1, 1.0);
        let o = Point::origin(&pr);
        let k = kernel(&pr, &o, &o).unwrap();
        assert!((k.value.re - 1.0 / (PI * PI)).abs() < 1e-15);
        assert_eq!(k.value.im, 0.0);
        assert_eq!(k.t_arg, c(0.0, 0.0));
        assert!((k.value.re - 0.1013211836).abs() < 1e-10);
    }

    #[test]
    fn kernel_hermitian_and_diagonal_positive() {
        for pr in [params(1, 1, 1.0), params(2, 1, 0.5), params(2, 3, 2.0)] {
            let b = Bergman::new(&pr).unwrap();
            let pts = sample_interior(&pr, 9, 30);
            for w in pts.windows(2) {
                let kpq = b.kernel(&w[0], &w[1]).unwrap().value;
                let kqp = b.kernel(&w[1], &w[0]).unwrap().value;
                assert!((kpq - kqp.conj()).norm() <= 1e-12 * kpq.norm());
                let kpp = b.kernel(&w[0], &w[0]).unwrap();
                assert!(kpp.value.re > 0.0 && kpp.value.im.abs() <= 1e-12 * kpp.value.re);
                assert!(kpp.t_arg.re >= 0.0 && kpp.t_arg.re < 1.0);
            }
        }
    }

    #[test]
    fn pole_on_boundary_diagonal() {
        let pr = params(1, 1, 1.0);
        let p = Point::real(&[0.0], &[1.0]);
        assert!(matches!(kernel(&pr, &p, &p), Err(Error::PoleProximity { .. })));
        assert!(matches!(
            kernel(&pr, &p, &Point::real(&[0.0, 1.0], &[0.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gradient_at_origin_and_slice() {
        let pr = params(2, 2, 1.5);
        let o = Point::origin(&pr);
        assert!(log_kernel_grad_wbar(&pr, &o, &o).unwrap().iter().all(|c| c.norm() == 0.0));
        let p = Point::new(vec![c(0.3, 0.1), c(-0.2, 0.4)], vec![c(0.1, 0.0), c(0.0, 0.2)]);
        let g = log_kernel_grad_wbar(&pr, &p, &o).unwrap();
        for i in 0..2 {
            assert!((g[i] - p.z[i] * 2.0 * 1.5).norm() < 1e-15);
        }
    }

    #[test]
    fn metric_origin_examples() {
        let pr = params(1, 1, 1.0);
        let o = Point::origin(&pr);
        let t = metric(&pr, &o, &o).unwrap();
        assert_eq!(t, CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(4.0, 0.0)])));
        for pr in [params(2, 1, 0.5), params(1, 2, 2.0), params(3, 2, 1.0)] {
            let b = Bergman::new(&pr).unwrap();
            let o = Point::origin(&pr);
            let t = b.metric(&o, &o).unwrap();
            assert!(max_abs(&(&t - b.metric_origin())) < 1e-12);
            // A_{n,m+1}(0) / A_{n,m}(0) = (m+1)^{n+1} / m^n
            let m = pr.m as f64;
            let ratio = (m + 1.0).powi(pr.n as i32 + 1) / m.powi(pr.n as i32);
            assert!((t[(pr.n, pr.n)].re - ratio).abs() < 1e-12 * ratio);
            assert!(min_eigenvalue(&t) > 0.0);
        }
    }

    #[test]
    fn metric_constant_against_origin() {
        let pr = params(2, 1, 1.0);
        let b = Bergman::new(&pr).unwrap();
        let o = Point::origin(&pr);
        let t00 = b.metric_origin();
        for p in sample_interior(&pr, 4, 20) {
            assert!(max_abs(&(b.metric(&p, &o).unwrap() - &t00)) < 1e-12);
        }
    }

    #[test]
    fn metric_is_hermitian_on_diagonal() {
        let pr = params(2, 2, 0.8);
        let b = Bergman::new(&pr).unwrap();
        for p in sample_interior(&pr, 21, 20) {
            let t = b.metric(&p, &p).unwrap();
            assert!(hermitian_deviation(&t) <= 1e-10 * max_abs(&t));
        }
    }

    #[test]
    fn sqrt_examples() {
        let id = CMatrix::identity(3, 3);
        assert!(max_abs(&(sqrt_pd(&id).unwrap() - &id)) < 1e-15);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(4.0, 0.0)]));
        let r = sqrt_pd(&d).unwrap();
        let want = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(2.0, 0.0)]));
        assert!(max_abs(&(r - want)) < 1e-14);
        let ri = inv_sqrt_pd(&d).unwrap();
        assert!((ri[(1, 1)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn sqrt_errors() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(0.0, 1e-6);
        assert!(matches!(sqrt_pd(&m), Err(Error::NotHermitian { .. })));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(-1.0, 0.0)]));
        assert!(matches!(sqrt_pd(&m), Err(Error::NotPositiveDefinite { .. })));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(1e-12, 0.0)]));
        assert!(matches!(inv_sqrt_pd(&m), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn representative_map_example() {
        let pr = params(1, 1, 1.0);
        let s = representative_map(&pr, &Point::real(&[0.5], &[0.1])).unwrap();
        assert!((s[0] - c(0.5, 0.0)).norm() < 1e-12);
        assert!((s[1] - c(0.2, 0.0)).norm() < 1e-12);
        let s0 = representative_map(&pr, &Point::origin(&pr)).unwrap();
        assert!(s0.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn l_matrix_identity() {
        let pr = params(2, 1, 1.0);
        let l = l_matrix(&pr, &Automorphism::identity(&pr)).unwrap();
        assert!(max_abs(&(l - CMatrix::identity(3, 3))) < 1e-14);
        let t = Automorphism::translation(&pr, vec![c(0.1, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(l_matrix(&pr, &t), Err(Error::DoesNotFixOrigin { .. })));
    }
}
