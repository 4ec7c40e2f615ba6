//! Automorphisms of `D_{n,m}` in the canonical form `phi_v . phi_{U'} . phi_U`:
//!
//! ```text
//! (z, zeta) -> (U z + v, s(z) U' zeta),   s(z) = exp(-mu v^* U z - mu |v|^2 / 2)
//! ```
//!
//! with `U`, `U'` unitary and `v^* w = sum conj(v_i) w_i`. Composition moves
//! the Heisenberg phase `exp(-i mu Im(v_a^* U_a v_b))` into `U'`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bergman::{max_abs, CMatrix, CVector};
use crate::domain::{DomainParams, Point};
use crate::error::{Error, Result};

/// Unitarity tolerance enforced at construction.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Automorphism {
    pub u: CMatrix,
    pub u_prime: CMatrix,
    pub v: CVector,
}

fn unitary_deviation(m: &CMatrix) -> f64 {
    max_abs(&(m.adjoint() * m - CMatrix::identity(m.nrows(), m.ncols())))
}

fn check_unitary(m: &CMatrix, which: &'static str, size: usize) -> Result<()> {
    if m.nrows() != size || m.ncols() != size {
        return Err(Error::DimensionMismatch {
            what: which,
            expected: size,
            got: if m.nrows() != size { m.nrows() } else { m.ncols() },
        });
    }
    let deviation = unitary_deviation(m);
    if deviation > UNITARY_TOLERANCE {
        return Err(Error::NotUnitary { which, deviation });
    }
    Ok(())
}

/// Re-orthonormalizes via QR, keeping the column phases of the input.
fn repair_unitary(m: &CMatrix) -> CMatrix {
    let qr = m.clone().qr();
    let (q, r) = (qr.q(), qr.r());
    normalize_phases(q, &r)
}

fn normalize_phases(q: CMatrix, r: &CMatrix) -> CMatrix {
    let mut q = q;
    for k in 0..q.ncols() {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..q.nrows() {
            q[(i, k)] *= phase;
        }
    }
    q
}

impl Automorphism {
    /// Validates dimensions and unitarity of both blocks.
    pub fn new(params: &DomainParams, u: CMatrix, u_prime: CMatrix, v: CVector) -> Result<Self> {
        check_unitary(&u, "U", params.n)?;
        check_unitary(&u_prime, "Uprime", params.m)?;
        if v.len() != params.n {
            return Err(Error::DimensionMismatch {
                what: "v",
                expected: params.n,
                got: v.len(),
            });
        }
        Ok(Automorphism { u, u_prime, v })
    }

    /// Like [`Automorphism::new`] but re-orthonormalizes nearly unitary
    /// blocks instead of rejecting them.
    pub fn new_repaired(params: &DomainParams, u: CMatrix, u_prime: CMatrix, v: CVector) -> Result<Self> {
        let fix = |m: CMatrix, size: usize| {
            if m.nrows() == size && m.ncols() == size {
                repair_unitary(&m)
            } else {
                m
            }
        };
        Self::new(params, fix(u, params.n), fix(u_prime, params.m), v)
    }

    pub fn identity(params: &DomainParams) -> Self {
        Automorphism {
            u: CMatrix::identity(params.n, params.n),
            u_prime: CMatrix::identity(params.m, params.m),
            v: CVector::zeros(params.n),
        }
    }

    /// `phi_v`.
    pub fn translation(params: &DomainParams, v: Vec<Complex64>) -> Result<Self> {
        let id = Self::identity(params);
        Self::new(params, id.u, id.u_prime, CVector::from_vec(v))
    }

    /// `phi_U`.
    pub fn rotate_z(params: &DomainParams, u: CMatrix) -> Result<Self> {
        let id = Self::identity(params);
        Self::new(params, u, id.u_prime, id.v)
    }

    /// `phi_{U'}`.
    pub fn rotate_zeta(params: &DomainParams, u_prime: CMatrix) -> Result<Self> {
        let id = Self::identity(params);
        Self::new(params, id.u, u_prime, id.v)
    }

    pub fn fixes_origin(&self) -> bool {
        self.v.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    /// Largest parameter difference to `other`.
    pub fn distance(&self, other: &Automorphism) -> f64 {
        max_abs(&(&self.u - &other.u))
            .max(max_abs(&(&self.u_prime - &other.u_prime)))
            .max(self.v.iter().zip(other.v.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }

    fn check_dims(&self, params: &DomainParams) -> Result<()> {
        let mismatch = |what, expected, got| Error::DimensionMismatch { what, expected, got };
        if self.u.nrows() != params.n {
            return Err(mismatch("U", params.n, self.u.nrows()));
        }
        if self.u_prime.nrows() != params.m {
            return Err(mismatch("Uprime", params.m, self.u_prime.nrows()));
        }
        if self.v.len() != params.n {
            return Err(mismatch("v", params.n, self.v.len()));
        }
        Ok(())
    }

    /// `s(z) = exp(-mu v^* U z - mu |v|^2 / 2)` evaluated at `U z`.
    fn fibre_scale(&self, params: &DomainParams, uz: &CVector) -> Complex64 {
        let vz = self.v.dotc(uz);
        (-(vz + self.v.norm_squared() * 0.5) * params.mu).exp()
    }
}

pub fn apply(params: &DomainParams, a: &Automorphism, p: &Point) -> Result<Point> {
    a.check_dims(params)?;
    p.check(params)?;
    let uz = &a.u * CVector::from_column_slice(&p.z);
    let s = a.fibre_scale(params, &uz);
    let zeta = (&a.u_prime * CVector::from_column_slice(&p.zeta)) * s;
    Ok(Point::new((uz + &a.v).iter().copied().collect(), zeta.iter().copied().collect()))
}

/// Canonical form of `a . b` (apply `b` first).
pub fn compose(params: &DomainParams, a: &Automorphism, b: &Automorphism) -> Result<Automorphism> {
    a.check_dims(params)?;
    b.check_dims(params)?;
    let ua_vb = &a.u * &b.v;
    let phase = Complex64::new(0.0, -params.mu * a.v.dotc(&ua_vb).im).exp();
    Ok(Automorphism {
        u: &a.u * &b.u,
        u_prime: (&a.u_prime * &b.u_prime) * phase,
        v: &a.v + ua_vb,
    })
}

pub fn inverse(params: &DomainParams, a: &Automorphism) -> Result<Automorphism> {
    a.check_dims(params)?;
    let u_inv = a.u.adjoint();
    let v = -(&u_inv * &a.v);
    Ok(Automorphism {
        u: u_inv,
        u_prime: a.u_prime.adjoint(),
        v,
    })
}

/// Holomorphic Jacobian `d phi_i / d x_k` (rows: output, columns: input).
pub fn jacobian(params: &DomainParams, a: &Automorphism, p: &Point) -> Result<CMatrix> {
    a.check_dims(params)?;
    p.check(params)?;
    let (n, m) = (params.n, params.m);
    let uz = &a.u * CVector::from_column_slice(&p.z);
    let s = a.fibre_scale(params, &uz);
    let up_zeta = &a.u_prime * CVector::from_column_slice(&p.zeta);
    let v_star_u = a.v.adjoint() * &a.u;
    let mut j = CMatrix::zeros(n + m, n + m);
    j.view_mut((0, 0), (n, n)).copy_from(&a.u);
    j.view_mut((n, 0), (m, n))
        .copy_from(&(&up_zeta * &v_star_u * (s * -params.mu)));
    j.view_mut((n, n), (m, m)).copy_from(&(&a.u_prime * s));
    Ok(j)
}

/// `det J = det U * s(z)^m * det U'`.
pub fn jacobian_det(params: &DomainParams, a: &Automorphism, p: &Point) -> Result<Complex64> {
    a.check_dims(params)?;
    p.check(params)?;
    let uz = &a.u * CVector::from_column_slice(&p.z);
    let s = a.fibre_scale(params, &uz);
    Ok(a.u.determinant() * s.powu(params.m as u32) * a.u_prime.determinant())
}

fn complex_normal<R: Rng>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (variance / 2.0).sqrt();
    Complex64::new(
        rng.sample::<f64, _>(StandardNormal) * sd,
        rng.sample::<f64, _>(StandardNormal) * sd,
    )
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of
/// `diag(R)` pushed back into `Q`.
pub fn haar_unitary<R: Rng>(rng: &mut R, size: usize) -> CMatrix {
    let g = DMatrix::from_fn(size, size, |_, _| complex_normal(rng, 1.0));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    normalize_phases(q, &r)
}

pub fn random_automorphism_with<R: Rng>(params: &DomainParams, rng: &mut R) -> Automorphism {
    let u = haar_unitary(rng, params.n);
    let u_prime = haar_unitary(rng, params.m);
    let v = DVector::from_fn(params.n, |_, _| complex_normal(rng, 1.0));
    Automorphism { u, u_prime, v }
}

/// Haar `U`, `U'` and complex Gaussian `v` with `E|v_i|^2 = 1`.
pub fn random_automorphism(params: &DomainParams, seed: u64) -> Automorphism {
    random_automorphism_with(params, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// Same as [`random_automorphism`] with `v = 0`.
pub fn random_origin_fixing(params: &DomainParams, seed: u64) -> Automorphism {
    let mut a = random_automorphism(params, seed);
    a.v.fill(Complex64::new(0.0, 0.0));
    a
}

/// JSON layout `{"U": [[[re,im],..],..], "Uprime": [...], "v": [[re,im],..]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AutomorphismJson {
    #[serde(rename = "U")]
    pub u: Vec<Vec<Complex64>>,
    #[serde(rename = "Uprime")]
    pub u_prime: Vec<Vec<Complex64>>,
    pub v: Vec<Complex64>,
}

fn rows_of(m: &CMatrix) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_of(rows: &[Vec<Complex64>], what: &str) -> Result<CMatrix> {
    let size = rows.len();
    if rows.iter().any(|r| r.len() != size) {
        return Err(Error::Encoding(format!("{what} must be a square matrix")));
    }
    Ok(CMatrix::from_fn(size, size, |i, k| rows[i][k]))
}

impl From<&Automorphism> for AutomorphismJson {
    fn from(a: &Automorphism) -> Self {
        AutomorphismJson {
            u: rows_of(&a.u),
            u_prime: rows_of(&a.u_prime),
            v: a.v.iter().copied().collect(),
        }
    }
}

impl AutomorphismJson {
    /// Decodes and validates; the dimensions are taken from the blocks.
    pub fn into_automorphism(self, mu: f64) -> Result<(DomainParams, Automorphism)> {
        let u = matrix_of(&self.u, "U")?;
        let u_prime = matrix_of(&self.u_prime, "Uprime")?;
        let params = DomainParams::new(u.nrows(), u_prime.nrows(), mu)?;
        let a = Automorphism::new(&params, u, u_prime, CVector::from_vec(self.v))?;
        Ok((params, a))
    }
}

impl Serialize for Automorphism {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        AutomorphismJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Automorphism {
    /// Structural decode only; unitarity is checked by
    /// [`AutomorphismJson::into_automorphism`] or [`Automorphism::new`].
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = AutomorphismJson::deserialize(deserializer)?;
        let u = matrix_of(&raw.u, "U").map_err(serde::de::Error::custom)?;
        let u_prime = matrix_of(&raw.u_prime, "Uprime").map_err(serde::de::Error::custom)?;
        Ok(Automorphism {
            u,
            u_prime,
            v: CVector::from_vec(raw.v),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{defect, sample_interior};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(n: usize, m: usize, mu: f64) -> DomainParams {
        DomainParams::new(n, m, mu).unwrap()
    }

    fn point_dist(p: &Point, q: &Point) -> f64 {
        (p.coords() - q.coords()).iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_acts_trivially() {
        let pr = params(2, 3, 0.9);
        let id = Automorphism::identity(&pr);
        for p in sample_interior(&pr, 1, 10) {
            assert_eq!(apply(&pr, &id, &p).unwrap(), p);
        }
        let j = jacobian(&pr, &id, &Point::origin(&pr)).unwrap();
        assert_eq!(j, CMatrix::identity(5, 5));
    }

    #[test]
    fn translation_of_fibre_axis() {
        let pr = params(2, 1, 1.3);
        let v = vec![c(0.4, -0.2), c(1.0, 0.5)];
        let a = Automorphism::translation(&pr, v.clone()).unwrap();
        let zeta = c(0.3, 0.6);
        let out = apply(&pr, &a, &Point::new(vec![c(0.0, 0.0); 2], vec![zeta])).unwrap();
        assert_eq!(out.z, v);
        let v2: f64 = v.iter().map(|c| c.norm_sqr()).sum();
        let want = zeta * (-pr.mu * v2 / 2.0).exp();
        assert!((out.zeta[0] - want).norm() < 1e-15);
    }

    #[test]
    fn construction_rejects_non_unitary() {
        let pr = params(2, 1, 1.0);
        let mut u = CMatrix::identity(2, 2);
        u[(0, 1)] = c(1e-6, 0.0);
        let err = Automorphism::new(&pr, u.clone(), CMatrix::identity(1, 1), CVector::zeros(2));
        assert!(matches!(err, Err(Error::NotUnitary { which: "U", .. })));
        let fixed = Automorphism::new_repaired(&pr, u, CMatrix::identity(1, 1), CVector::zeros(2)).unwrap();
        assert!(unitary_deviation(&fixed.u) < 1e-14);
        let err = Automorphism::new(&pr, CMatrix::identity(2, 2), CMatrix::identity(2, 2), CVector::zeros(2));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let err = Automorphism::new(&pr, CMatrix::identity(2, 2), CMatrix::identity(1, 1), CVector::zeros(1));
        assert!(matches!(err, Err(Error::DimensionMismatch { what: "v", .. })));
    }

    #[test]
    fn heisenberg_phase_example() {
        let pr = params(1, 1, 1.0);
        let a = Automorphism::translation(&pr, vec![c(1.0, 0.0)]).unwrap();
        let b = Automorphism::translation(&pr, vec![c(0.0, 1.0)]).unwrap();
        let ab = compose(&pr, &a, &b).unwrap();
        assert!((ab.v[0] - c(1.0, 1.0)).norm() < 1e-15);
        assert!((ab.u_prime[(0, 0)] - c(0.0, -1.0).exp()).norm() < 1e-15);
        for p in sample_interior(&pr, 2, 50) {
            let lhs = apply(&pr, &ab, &p).unwrap();
            let rhs = apply(&pr, &a, &apply(&pr, &b, &p).unwrap()).unwrap();
            assert!(point_dist(&lhs, &rhs) <= 1e-12);
        }
    }

    #[test]
    fn rotation_past_translation() {
        let pr = params(2, 2, 0.7);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary(&mut rng, 2);
        let v = CVector::from_vec(vec![c(0.3, 0.1), c(-0.5, 0.2)]);
        let rot = Automorphism::rotate_z(&pr, u.clone()).unwrap();
        let tv = Automorphism::translation(&pr, v.iter().copied().collect()).unwrap();
        let tuv = Automorphism::translation(&pr, (&u * &v).iter().copied().collect()).unwrap();
        let lhs = compose(&pr, &rot, &tv).unwrap();
        let rhs = compose(&pr, &tuv, &rot).unwrap();
        for p in sample_interior(&pr, 6, 30) {
            let d = point_dist(&apply(&pr, &lhs, &p).unwrap(), &apply(&pr, &rhs, &p).unwrap());
            assert!(d <= 1e-12);
        }
    }

    #[test]
    fn inverse_examples() {
        let pr = params(2, 1, 1.0);
        let id = Automorphism::identity(&pr);
        assert_eq!(inverse(&pr, &id).unwrap(), id);
        let t = Automorphism::translation(&pr, vec![c(0.5, 1.0), c(-2.0, 0.1)]).unwrap();
        let ti = inverse(&pr, &t).unwrap();
        let expect = Automorphism::translation(&pr, vec![c(-0.5, -1.0), c(2.0, -0.1)]).unwrap();
        assert!(ti.distance(&expect) < 1e-15);
        let a = random_automorphism(&pr, 8);
        let ai = inverse(&pr, &a).unwrap();
        assert!(compose(&pr, &a, &ai).unwrap().distance(&id) < 1e-12);
        for p in sample_interior(&pr, 3, 100) {
            let back = apply(&pr, &ai, &apply(&pr, &a, &p).unwrap()).unwrap();
            assert!(point_dist(&back, &p) <= 1e-10);
        }
    }

    #[test]
    fn jacobian_block_form_at_origin() {
        let pr = params(2, 2, 1.0);
        let a = random_origin_fixing(&pr, 13);
        let j = jacobian(&pr, &a, &Point::origin(&pr)).unwrap();
        assert!(max_abs(&(j.view((0, 0), (2, 2)) - &a.u)) < 1e-15);
        assert!(max_abs(&(j.view((2, 2), (2, 2)) - &a.u_prime)) < 1e-15);
        assert!(max_abs(&j.view((2, 0), (2, 2)).into_owned()) == 0.0);
        assert!(max_abs(&j.view((0, 2), (2, 2)).into_owned()) == 0.0);
        let det = j.determinant();
        assert!((det - a.u.determinant() * a.u_prime.determinant()).norm() < 1e-12);
        assert!((det.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobian_det_matches_matrix() {
        let pr = params(2, 3, 0.6);
        let a = random_automorphism(&pr, 77);
        for p in sample_interior(&pr, 7, 10) {
            let j = jacobian(&pr, &a, &p).unwrap();
            let d = jacobian_det(&pr, &a, &p).unwrap();
            assert!((j.determinant() - d).norm() <= 1e-12 * d.norm());
        }
    }

    #[test]
    fn random_elements() {
        let pr = params(3, 2, 1.0);
        let a = random_automorphism(&pr, 42);
        assert_eq!(a, random_automorphism(&pr, 42));
        assert_ne!(a, random_automorphism(&pr, 43));
        assert!(Automorphism::new(&pr, a.u.clone(), a.u_prime.clone(), a.v.clone()).is_ok());
    }

    #[test]
    fn haar_trace_moment() {
        // E|tr U|^2 = 1 for Haar U(n), n >= 1.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let draws = 2000;
        let mean = (0..draws)
            .map(|_| haar_unitary(&mut rng, 3).trace().norm_sqr())
            .sum::<f64>()
            / draws as f64;
        assert!((mean - 1.0).abs() < 0.15, "mean {mean}");
    }

    #[test]
    fn maps_interior_to_interior() {
        let pr = params(2, 2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for p in sample_interior(&pr, 31, 1000) {
            let a = random_automorphism_with(&pr, &mut rng);
            assert!(defect(&pr, &apply(&pr, &a, &p).unwrap()).unwrap() > 0.0);
        }
    }

    #[test]
    fn json_round_trip() {
        let pr = params(2, 1, 1.0);
        let a = random_automorphism(&pr, 1);
        let text = serde_json::to_string(&a).unwrap();
        assert!(text.starts_with("{\"U\":[[["));
        let raw: AutomorphismJson = serde_json::from_str(&text).unwrap();
        let (p2, b) = raw.into_automorphism(1.0).unwrap();
        assert_eq!((p2.n, p2.m), (2, 1));
        assert_eq!(a, b);
        let bad = r#"{"U": [[[1,0],[0,0]]], "Uprime": [[[1,0]]], "v": [[0,0]]}"#;
        let raw: AutomorphismJson = serde_json::from_str(bad).unwrap();
        assert!(matches!(raw.into_automorphism(1.0), Err(Error::Encoding(_))));
    }
}
