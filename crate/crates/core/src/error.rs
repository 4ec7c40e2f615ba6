use thiserror::Error;

/// Errors produced by the kernel, domain and group operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("|1 - t| = {distance:e} is below the pole guard {guard:e}")]
    PoleProximity { distance: f64, guard: f64 },
    #[error("kernel value {modulus:e} is numerically zero")]
    KernelZero { modulus: f64 },
    #[error("direction is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },
    #[error("{which} block is not unitary (max deviation {deviation:e})")]
    NotUnitary { which: &'static str, deviation: f64 },
    #[error("automorphism does not fix the origin (|v| = {norm:e})")]
    DoesNotFixOrigin { norm: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("unsupported order: n = {n}, m = {m} (limit {limit})")]
    OrderOutOfRange { n: usize, m: usize, limit: usize },
    #[error("invalid encoding: {0}")]
    Encoding(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
