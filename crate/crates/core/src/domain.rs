//! Geometry of `D_{n,m} = {(z, zeta) : |zeta|^2 < exp(-mu |z|^2)}`.

use std::f64::consts::PI;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|dir|` accepted by [`project_to_boundary`].
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// The triple `(n, m, mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    pub n: usize,
    pub m: usize,
    pub mu: f64,
}

impl DomainParams {
    pub fn new(n: usize, m: usize, mu: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParams(format!(
                "n and m must be positive (got n={n}, m={m})"
            )));
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParams(format!("mu must be positive (got {mu})")));
        }
        Ok(DomainParams { n, m, mu })
    }

    /// Complex dimension `n + m`.
    pub fn dim(&self) -> usize {
        self.n + self.m
    }

    /// Real dimension of the automorphism group, `n^2 + m^2 + 2n`.
    pub fn automorphism_group_dim(&self) -> usize {
        self.n * self.n + self.m * self.m + 2 * self.n
    }

    /// Finite volume `pi^{n+m} / (m! (m mu)^n)`.
    pub fn volume(&self) -> f64 {
        let m_fact: f64 = (1..=self.m).map(|k| k as f64).product();
        PI.powi(self.dim() as i32) / (m_fact * (self.m as f64 * self.mu).powi(self.n as i32))
    }
}

impl FromStr for DomainParams {
    type Err = Error;

    /// Parses `"n,m,mu"`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let [n, m, mu] = parts.as_slice() else {
            return Err(Error::InvalidParams(format!("expected n,m,mu but got {s:?}")));
        };
        let bad = |what: &str| Error::InvalidParams(format!("cannot parse {what} in {s:?}"));
        DomainParams::new(
            n.parse().map_err(|_| bad("n"))?,
            m.parse().map_err(|_| bad("m"))?,
            mu.parse().map_err(|_| bad("mu"))?,
        )
    }
}

/// A point `(z, zeta)` of `C^n x C^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub z: Vec<Complex64>,
    pub zeta: Vec<Complex64>,
}

impl Point {
    pub fn new(z: Vec<Complex64>, zeta: Vec<Complex64>) -> Self {
        Point { z, zeta }
    }

    pub fn origin(params: &DomainParams) -> Self {
        Point {
            z: vec![Complex64::new(0.0, 0.0); params.n],
            zeta: vec![Complex64::new(0.0, 0.0); params.m],
        }
    }

    /// Builds a point from real parts only; convenient in tests.
    pub fn real(z: &[f64], zeta: &[f64]) -> Self {
        let c = |xs: &[f64]| xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Point { z: c(z), zeta: c(zeta) }
    }

    pub fn check(&self, params: &DomainParams) -> Result<()> {
        if self.z.len() != params.n {
            return Err(Error::DimensionMismatch {
                what: "z",
                expected: params.n,
                got: self.z.len(),
            });
        }
        if self.zeta.len() != params.m {
            return Err(Error::DimensionMismatch {
                what: "zeta",
                expected: params.m,
                got: self.zeta.len(),
            });
        }
        Ok(())
    }

    /// Concatenated coordinates `(z, zeta)` as a column vector.
    pub fn coords(&self) -> DVector<Complex64> {
        DVector::from_iterator(
            self.z.len() + self.zeta.len(),
            self.z.iter().chain(&self.zeta).copied(),
        )
    }

    pub fn from_coords(n: usize, coords: &DVector<Complex64>) -> Self {
        Point {
            z: coords.iter().take(n).copied().collect(),
            zeta: coords.iter().skip(n).copied().collect(),
        }
    }

    pub fn on_slice(&self) -> bool {
        self.zeta.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }
}

pub(crate) fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(Complex64::norm_sqr).sum()
}

/// `exp(-mu |z|^2) - |zeta|^2`: positive inside, zero on the boundary,
/// negative outside.
pub fn defect(params: &DomainParams, p: &Point) -> Result<f64> {
    p.check(params)?;
    Ok((-params.mu * norm_sqr(&p.z)).exp() - norm_sqr(&p.zeta))
}

pub fn is_interior(params: &DomainParams, p: &Point) -> Result<bool> {
    Ok(defect(params, p)? > 0.0)
}

/// The boundary point over `z` in the complex direction `dir`.
pub fn project_to_boundary(params: &DomainParams, z: &[Complex64], dir: &[Complex64]) -> Result<Point> {
    if dir.len() != params.m {
        return Err(Error::DimensionMismatch {
            what: "dir",
            expected: params.m,
            got: dir.len(),
        });
    }
    let norm = norm_sqr(dir).sqrt();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::NotUnit { norm });
    }
    if z.len() != params.n {
        return Err(Error::DimensionMismatch {
            what: "z",
            expected: params.n,
            got: z.len(),
        });
    }
    let radius = (-0.5 * params.mu * norm_sqr(z)).exp();
    Ok(Point::new(z.to_vec(), dir.iter().map(|c| c * radius).collect()))
}

/// Deterministic interior samples: `z` complex Gaussian with variance
/// `1/(2 mu)` per real coordinate, `zeta` uniform in the fibre ball of radius
/// `exp(-mu |z|^2 / 2)`.
pub fn sample_interior(params: &DomainParams, seed: u64, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_interior_with(params, &mut rng, count, 1.0)
}

/// Same as [`sample_interior`] on a caller-owned generator. `z_spread`
/// multiplies the variance of `z`; `1.0` gives the standard sampler.
pub fn sample_interior_with<R: Rng>(
    params: &DomainParams,
    rng: &mut R,
    count: usize,
    z_spread: f64,
) -> Vec<Point> {
    let sigma = (z_spread / (2.0 * params.mu)).sqrt();
    (0..count)
        .map(|_| loop {
            let z: Vec<Complex64> = (0..params.n).map(|_| gaussian(rng) * sigma).collect();
            let radius = (-0.5 * params.mu * norm_sqr(&z)).exp();
            let zeta = uniform_ball(rng, params.m, radius);
            let p = Point { z, zeta };
            // A radius draw that rounds onto the sphere is redrawn.
            if defect(params, &p).unwrap_or(-1.0) > 0.0 {
                break p;
            }
        })
        .collect()
}

/// Density of [`sample_interior_with`] at `p` (Lebesgue measure on
/// `C^{n+m} = R^{2(n+m)}`).
pub fn interior_density(params: &DomainParams, p: &Point, z_spread: f64) -> f64 {
    let n = params.n as i32;
    let m = params.m as i32;
    let a = params.mu / z_spread;
    let z2 = norm_sqr(&p.z);
    let gauss = (a / PI).powi(n) * (-a * z2).exp();
    let m_fact: f64 = (1..=params.m).map(|k| k as f64).product();
    let ball = m_fact / PI.powi(m) * (params.m as f64 * params.mu * z2).exp();
    gauss * ball
}

/// Standard complex normal: real and imaginary parts `N(0, 1)`.
fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn uniform_ball<R: Rng>(rng: &mut R, m: usize, radius: f64) -> Vec<Complex64> {
    let dir: Vec<Complex64> = (0..m).map(|_| gaussian(rng)).collect();
    let norm = norm_sqr(&dir).sqrt();
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / (2.0 * m as f64));
    dir.into_iter().map(|c| c * (r / norm)).collect()
}
