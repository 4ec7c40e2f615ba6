//! Executable mathematics of the Fock-Bargmann-Hartogs domain
//! `D_{n,m} = {(z, zeta) in C^n x C^m : |zeta|^2 < exp(-mu |z|^2)}`.
//!
//! * [`polylog`]: exact `A_{n,m}` polynomials, Stirling numbers, and
//!   derivatives of `Li_{-n}`.
//! * [`domain`]: parameters, membership, boundary projection and sampling.
//! * [`bergman`]: kernel, log-gradient, metric tensor, representative map.
//! * [`autgroup`]: the automorphism group in canonical coordinates.
//! * [`verify`]: seeded numerical checks of the transformation laws.

pub mod autgroup;
pub mod bergman;
pub mod domain;
pub mod error;
pub mod polylog;
pub mod verify;

pub use autgroup::{apply, compose, inverse, jacobian, random_automorphism, Automorphism};
pub use bergman::{kernel, metric, Bergman, CMatrix, CVector, KernelValue};
pub use domain::{defect, DomainParams, Point};
pub use error::{Error, Result};
pub use polylog::{a_poly, f_eval, li_neg_rational, PolyExact, RationalForm};
pub use verify::{CheckReport, Suite};
