//! Numerical checks of the identities satisfied by the kernel, the metric and
//! the automorphism group. Every check returns a [`CheckReport`] and is
//! deterministic for fixed inputs and seed.

use std::fmt;
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autgroup::{
    apply, jacobian, jacobian_det, random_automorphism_with, random_origin_fixing, Automorphism,
};
use crate::bergman::{inv_sqrt_pd, max_abs, sqrt_pd, Bergman, CMatrix, CVector};
use crate::domain::{
    defect, interior_density, project_to_boundary, sample_interior, sample_interior_with,
    DomainParams, Point,
};
use crate::error::{Error, Result};

/// Relative tolerance for the kernel transformation law.
pub const KERNEL_LAW_TOLERANCE: f64 = 1e-8;
/// Relative tolerance for the metric transformation law.
pub const METRIC_LAW_TOLERANCE: f64 = 1e-7;
/// Tolerance for the representative-map and Cartan identities.
pub const CARTAN_TOLERANCE: f64 = 1e-7;
/// Tolerance for the reconstructed linear map against `diag(U, U')`.
pub const LINEAR_MAP_TOLERANCE: f64 = 1e-8;
/// Lower bound `-tol` for the smallest Gram eigenvalue.
pub const GRAM_TOLERANCE: f64 = 1e-10;
/// Absolute tolerance on `|defect|` of mapped boundary points.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;
/// Floor of the Monte-Carlo acceptance band.
pub const MC_TOLERANCE: f64 = 0.02;
/// Minimum sample count for [`mc_reproduce_constant`].
pub const MC_MIN_SAMPLES: usize = 100_000;
/// Pairs with `|1 - t| <= PAIR_POLE_MARGIN` are not used by the law checks.
pub const PAIR_POLE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResidualKind {
    Relative,
    Absolute,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub samples: usize,
    pub passed: bool,
    pub seed: u64,
    pub residual: ResidualKind,
    /// Samples dropped by a guard (kernel zero, pole margin).
    #[serde(default)]
    pub skipped: usize,
    /// Check-specific value: the smallest Gram eigenvalue, or the
    /// Monte-Carlo estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
}

impl CheckReport {
    fn new(name: &str, max_residual: f64, tolerance: f64, samples: usize, residual: ResidualKind) -> Self {
        CheckReport {
            name: name.to_string(),
            max_residual,
            tolerance,
            samples,
            passed: max_residual <= tolerance,
            seed: 0,
            residual,
            skipped: 0,
            value: None,
            stderr: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Merges two reports of the same check over disjoint samples.
    pub fn merge(mut self, other: CheckReport) -> CheckReport {
        self.max_residual = self.max_residual.max(other.max_residual);
        self.samples += other.samples;
        self.skipped += other.skipped;
        self.passed = self.max_residual <= self.tolerance;
        self
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<16} residual {:.3e} ({:?}) tol {:.1e} samples {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_residual,
            self.residual,
            self.tolerance,
            self.samples,
        )?;
        if self.skipped > 0 {
            write!(f, " skipped {}", self.skipped)?;
        }
        if let Some(v) = self.value {
            write!(f, " value {v:.6}")?;
        }
        if let Some(s) = self.stderr {
            write!(f, " stderr {s:.3e}")?;
        }
        write!(f, " seed {}", self.seed)
    }
}

fn rel(diff: f64, reference: f64) -> (f64, ResidualKind) {
    if reference > 0.0 {
        (diff / reference, ResidualKind::Relative)
    } else {
        (diff, ResidualKind::Absolute)
    }
}

fn vec_max(v: &CVector) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn worst(kind: &mut ResidualKind, worst: &mut f64, (r, k): (f64, ResidualKind)) {
    if k == ResidualKind::Absolute {
        *kind = ResidualKind::Absolute;
    }
    if r > *worst || r.is_nan() {
        *worst = if r.is_nan() { f64::INFINITY } else { r };
    }
}

/// `K(p,q) = conj(det J(q)) K(a p, a q) det J(p)`.
pub fn check_kernel_law(params: &DomainParams, a: &Automorphism, pairs: &[(Point, Point)]) -> Result<CheckReport> {
    let b = Bergman::new(params)?;
    let mut max_res = 0.0;
    let mut kind = ResidualKind::Relative;
    for (p, q) in pairs {
        let lhs = b.kernel(p, q)?.value;
        let mapped = b.kernel(&apply(params, a, p)?, &apply(params, a, q)?)?.value;
        let rhs = jacobian_det(params, a, q)?.conj() * mapped * jacobian_det(params, a, p)?;
        worst(&mut kind, &mut max_res, rel((lhs - rhs).norm(), lhs.norm()));
    }
    Ok(CheckReport::new("kernel-law", max_res, KERNEL_LAW_TOLERANCE, pairs.len(), kind))
}

/// `T(p,q) = J(q)^H T(a p, a q) J(p)`; pairs where the kernel vanishes are
/// skipped and counted.
pub fn check_metric_law(params: &DomainParams, a: &Automorphism, pairs: &[(Point, Point)]) -> Result<CheckReport> {
    let b = Bergman::new(params)?;
    let mut max_res = 0.0;
    let mut kind = ResidualKind::Relative;
    let mut skipped = 0;
    for (p, q) in pairs {
        let lhs = match b.metric(p, q) {
            Err(Error::KernelZero { .. }) => {
                skipped += 1;
                continue;
            }
            other => other?,
        };
        let mapped = match b.metric(&apply(params, a, p)?, &apply(params, a, q)?) {
            Err(Error::KernelZero { .. }) => {
                skipped += 1;
                continue;
            }
            other => other?,
        };
        let rhs = jacobian(params, a, q)?.adjoint() * mapped * jacobian(params, a, p)?;
        worst(&mut kind, &mut max_res, rel(max_abs(&(&lhs - rhs)), max_abs(&lhs)));
    }
    let mut report = CheckReport::new("metric-law", max_res, METRIC_LAW_TOLERANCE, pairs.len() - skipped, kind);
    report.skipped = skipped;
    Ok(report)
}

/// `T(0,0)^{-1/2} L(a,0) T(0,0)^{1/2}`, which for an origin-fixing `a`
/// must be the linear map `a` itself.
pub fn reconstruct_linear_map(params: &DomainParams, a: &Automorphism) -> Result<CMatrix> {
    let b = Bergman::new(params)?;
    let origin = Point::origin(params);
    let t00 = b.metric(&origin, &origin)?;
    Ok(inv_sqrt_pd(&t00)? * b.l_matrix(a)? * sqrt_pd(&t00)?)
}

/// `sigma_0(a p) = L(a,0) sigma_0(p)` and `a p = T^{-1/2} L T^{1/2} p` for
/// an origin-fixing `a`.
pub fn check_cartan(params: &DomainParams, a: &Automorphism, points: &[Point]) -> Result<CheckReport> {
    let b = Bergman::new(params)?;
    let l = b.l_matrix(a)?;
    let linear = reconstruct_linear_map(params, a)?;
    let mut max_res = 0.0;
    let mut kind = ResidualKind::Relative;
    for p in points {
        let ap = apply(params, a, p)?;
        let lhs = b.representative_map(&ap)?;
        let rhs = &l * b.representative_map(p)?;
        worst(&mut kind, &mut max_res, rel(vec_max(&(&lhs - rhs)), vec_max(&lhs)));
        let direct = ap.coords();
        let via_l = &linear * p.coords();
        worst(&mut kind, &mut max_res, rel(vec_max(&(&direct - via_l)), vec_max(&direct)));
    }
    Ok(CheckReport::new("cartan", max_res, CARTAN_TOLERANCE, points.len(), kind))
}

/// Gram matrix `[K(p_i, p_j)]`.
pub fn gram_matrix(params: &DomainParams, points: &[Point]) -> Result<CMatrix> {
    let b = Bergman::new(params)?;
    let n = points.len();
    let mut g = CMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = b.kernel(&points[i], &points[j])?.value;
        }
    }
    Ok(g)
}

/// Smallest eigenvalue of the Gram matrix must be `>= -tol`.
pub fn check_gram_psd(params: &DomainParams, points: &[Point], tol: f64) -> Result<CheckReport> {
    let g = gram_matrix(params, points)?;
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    let min_eig = SymmetricEigen::new(h)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let mut report = CheckReport::new("gram", (-min_eig).max(0.0), tol, points.len(), ResidualKind::Absolute);
    report.value = Some(min_eig);
    Ok(report)
}

/// Options for [`mc_reproduce`].
#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    /// Base point `p` of `int K(p, q) dV(q)`; `None` means the origin.
    pub base: Option<Point>,
    /// Variance multiplier of the `z` proposal.
    pub z_spread: f64,
    /// Number of independently seeded substreams.
    pub streams: usize,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            base: None,
            z_spread: 1.0,
            streams: 64,
        }
    }
}

/// Monte-Carlo estimate of `int_D K((0,0), q) dV(q)`, which equals one.
/// Passes when `|estimate - 1| <= max(0.02, 4 stderr)`.
pub fn mc_reproduce_constant(params: &DomainParams, seed: u64, samples: usize) -> Result<CheckReport> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::InvalidParams(format!(
            "Monte-Carlo check needs at least {MC_MIN_SAMPLES} samples (got {samples})"
        )));
    }
    mc_reproduce(params, seed, samples, &McOptions::default())
}

/// Importance-sampling estimate of `int_D K(p, q) dV(q)` with the interior
/// sampler as proposal. Substreams are reduced in a fixed order, so the
/// result does not depend on the thread count.
pub fn mc_reproduce(params: &DomainParams, seed: u64, samples: usize, opts: &McOptions) -> Result<CheckReport> {
    let b = Bergman::new(params)?;
    let base = opts.base.clone().unwrap_or_else(|| Point::origin(params));
    base.check(params)?;
    let streams = opts.streams.clamp(1, samples.max(1));
    let partials: Vec<Result<(f64, f64)>> = (0..streams)
        .into_par_iter()
        .map(|k| {
            let count = samples / streams + usize::from(k < samples % streams);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            // Chunked draws keep memory flat for large counts.
            let mut left = count;
            while left > 0 {
                let chunk = left.min(4096);
                for q in sample_interior_with(params, &mut rng, chunk, opts.z_spread) {
                    let k = b.kernel(&base, &q)?.value;
                    let density = interior_density(params, &q, opts.z_spread);
                    let w = k / density;
                    sum += w.re;
                    sum_sq += w.re * w.re;
                }
                left -= chunk;
            }
            Ok((sum, sum_sq))
        })
        .collect();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for part in partials {
        let (s, s2) = part?;
        sum += s;
        sum_sq += s2;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
    let stderr = (var / n).sqrt();
    let residual = (mean - 1.0).abs();
    let tolerance = MC_TOLERANCE.max(4.0 * stderr);
    let mut report = CheckReport::new("mc", residual, tolerance, samples, ResidualKind::Absolute).with_seed(seed);
    report.value = Some(mean);
    report.stderr = Some(stderr);
    Ok(report)
}

/// `|defect(a p)|` for boundary points `p`.
pub fn check_boundary_invariance(
    params: &DomainParams,
    a: &Automorphism,
    boundary_points: &[Point],
) -> Result<CheckReport> {
    let mut max_res: f64 = 0.0;
    for p in boundary_points {
        max_res = max_res.max(defect(params, &apply(params, a, p)?)?.abs());
    }
    Ok(CheckReport::new(
        "boundary",
        max_res,
        BOUNDARY_TOLERANCE,
        boundary_points.len(),
        ResidualKind::Absolute,
    ))
}

/// Named groups of checks selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    KernelLaw,
    MetricLaw,
    Cartan,
    Gram,
    Mc,
    Boundary,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::KernelLaw,
        Suite::MetricLaw,
        Suite::Cartan,
        Suite::Gram,
        Suite::Mc,
        Suite::Boundary,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::KernelLaw => "kernel-law",
            Suite::MetricLaw => "metric-law",
            Suite::Cartan => "cartan",
            Suite::Gram => "gram",
            Suite::Mc => "mc",
            Suite::Boundary => "boundary",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .into_iter()
            .chain([Suite::All])
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidParams(format!("unknown suite {s:?}")))
    }
}

/// Sample counts used by [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteSizes {
    /// Independent (automorphism, pair) draws for the kernel law.
    pub kernel_law: usize,
    pub metric_law: usize,
    pub cartan: usize,
    pub gram: usize,
    pub mc: usize,
    pub boundary: usize,
}

impl Default for SuiteSizes {
    fn default() -> Self {
        SuiteSizes {
            kernel_law: 100,
            metric_law: 100,
            cartan: 100,
            gram: 40,
            mc: 1_000_000,
            boundary: 200,
        }
    }
}

/// Interior pairs with `|1 - t| > PAIR_POLE_MARGIN`.
pub fn sample_pairs(params: &DomainParams, seed: u64, count: usize) -> Result<Vec<(Point, Point)>> {
    let b = Bergman::new(params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let mut two = sample_interior_with(params, &mut rng, 2, 1.0);
        let q = two.pop().unwrap_or_else(|| Point::origin(params));
        let p = two.pop().unwrap_or_else(|| Point::origin(params));
        let t = b.kernel(&p, &q).map(|k| k.t_arg);
        if let Ok(t) = t {
            if (Complex64::new(1.0, 0.0) - t).norm() > PAIR_POLE_MARGIN {
                pairs.push((p, q));
            }
        }
    }
    Ok(pairs)
}

/// Boundary points over Gaussian `z` with uniformly random unit directions.
pub fn sample_boundary(params: &DomainParams, seed: u64, count: usize) -> Result<Vec<Point>> {
    sample_interior(params, seed, count)
        .into_iter()
        .map(|p| {
            let norm = p.zeta.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let dir: Vec<Complex64> = if norm > 0.0 {
                p.zeta.iter().map(|c| c / norm).collect()
            } else {
                let mut d = vec![Complex64::new(0.0, 0.0); params.m];
                d[0] = Complex64::new(1.0, 0.0);
                d
            };
            project_to_boundary(params, &p.z, &dir)
        })
        .collect()
}

fn law_draws<F>(params: &DomainParams, seed: u64, draws: usize, check: F) -> Result<CheckReport>
where
    F: Fn(&DomainParams, &Automorphism, &[(Point, Point)]) -> Result<CheckReport> + Sync,
{
    let reports: Vec<Result<CheckReport>> = (0..draws)
        .into_par_iter()
        .map(|k| {
            let sub = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(sub);
            let a = random_automorphism_with(params, &mut rng);
            let pairs = sample_pairs(params, sub ^ 0x5555, 1)?;
            check(params, &a, &pairs)
        })
        .collect();
    let mut merged: Option<CheckReport> = None;
    for r in reports {
        let r = r?;
        merged = Some(match merged {
            None => r,
            Some(m) => m.merge(r),
        });
    }
    merged
        .map(|r| r.with_seed(seed))
        .ok_or_else(|| Error::InvalidParams("no samples requested".into()))
}

/// Runs one suite, or all of them, with seeded random inputs.
pub fn run_suite(suite: Suite, params: &DomainParams, seed: u64, sizes: &SuiteSizes) -> Result<Vec<CheckReport>> {
    let one = |s: Suite| -> Result<CheckReport> {
        let report = match s {
            Suite::KernelLaw => law_draws(params, seed, sizes.kernel_law, check_kernel_law)?,
            Suite::MetricLaw => law_draws(params, seed, sizes.metric_law, check_metric_law)?,
            Suite::Cartan => {
                let a = random_origin_fixing(params, seed);
                check_cartan(params, &a, &sample_interior(params, seed ^ 1, sizes.cartan))?
            }
            Suite::Gram => {
                check_gram_psd(params, &sample_interior(params, seed, sizes.gram), GRAM_TOLERANCE)?
            }
            Suite::Mc => mc_reproduce_constant(params, seed, sizes.mc)?,
            Suite::Boundary => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_automorphism_with(params, &mut rng);
                check_boundary_invariance(params, &a, &sample_boundary(params, seed ^ 2, sizes.boundary)?)?
            }
            Suite::All => unreachable!(),
        };
        Ok(report.with_seed(seed))
    };
    match suite {
        Suite::All => Suite::EACH.into_iter().map(one).collect(),
        s => Ok(vec![one(s)?]),
    }
}
