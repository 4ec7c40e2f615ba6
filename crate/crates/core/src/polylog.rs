//! Exact closed forms for negative-order polylogarithms and their derivatives.
//!
//! For an integer `n >= 1` the polylogarithm `Li_{-n}(t) = sum_k k^n t^k` is a
//! rational function of `t`. Its `m`-th derivative has the shape
//! `A_{n,m}(t) / (1 - t)^{n+m+1}` where `A_{n,m}` is an integer polynomial of
//! degree `n`:
//!
//! ```text
//! A_{n,m}(t) = m! * sum_{j=0}^{n} (-1)^{n+j} (m+1)_j S(n+1, j+1) (1-t)^{n-j}
//! ```
//!
//! with `S` the Stirling numbers of the second kind and `(x)_j` the rising
//! factorial. All coefficient work is done with arbitrary-size integers; the
//! only conversion to floating point happens when a polynomial is evaluated.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `n` or `m` accepted by [`a_poly`] and friends.
pub const MAX_ORDER: usize = 64;

/// Minimum admissible `|1 - t|` when evaluating a rational form.
pub const POLE_GUARD: f64 = 1e-12;

/// Stirling number of the second kind `S(n, k)`; zero outside `0 <= k <= n`.
pub fn stirling2(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    stirling2_row(n).swap_remove(k)
}

/// The full row `[S(n, 0), ..., S(n, n)]`.
pub fn stirling2_row(n: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 1..=n {
        let mut next = vec![BigInt::zero(); i + 1];
        for (k, slot) in next.iter_mut().enumerate().skip(1) {
            let mut v = row.get(k - 1).cloned().unwrap_or_default();
            if let Some(prev) = row.get(k) {
                v += prev * BigInt::from(k);
            }
            *slot = v;
        }
        row = next;
    }
    row
}

/// Rising factorial `x (x+1) ... (x+j-1)`; the empty product is one.
pub fn pochhammer(x: i64, j: usize) -> BigInt {
    (0..j as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(x + i))
}

fn factorial(m: usize) -> BigInt {
    (1..=m as u64).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

fn binomial_row(k: usize) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 1..=k {
        let last = &row[i - 1];
        row.push(last * BigInt::from(k - i + 1) / BigInt::from(i));
    }
    row
}

/// Polynomial in `t` with exact integer coefficients, lowest degree first.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyExact {
    coeffs: Vec<BigInt>,
}

impl PolyExact {
    pub fn new(coeffs: Vec<BigInt>) -> Self {
        let mut p = PolyExact { coeffs };
        p.trim();
        p
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().copied().map(BigInt::from).collect())
    }

    pub fn zero() -> Self {
        PolyExact { coeffs: Vec::new() }
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn derivative(&self) -> PolyExact {
        PolyExact::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn add(&self, other: &PolyExact) -> PolyExact {
        let len = self.coeffs.len().max(other.coeffs.len());
        PolyExact::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &PolyExact) -> PolyExact {
        let len = self.coeffs.len().max(other.coeffs.len());
        PolyExact::new((0..len).map(|i| self.coeff(i) - other.coeff(i)).collect())
    }

    pub fn mul(&self, other: &PolyExact) -> PolyExact {
        if self.is_zero() || other.is_zero() {
            return PolyExact::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyExact::new(out)
    }

    pub fn scale(&self, k: &BigInt) -> PolyExact {
        PolyExact::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// `(1 - t)^k`.
    pub fn one_minus_t_pow(k: usize) -> PolyExact {
        PolyExact::new(
            binomial_row(k)
                .into_iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 0 { c } else { -c })
                .collect(),
        )
    }

    /// Coefficients rounded to the nearest `f64`.
    pub fn to_f64(&self) -> FloatPoly {
        FloatPoly {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| c.to_f64().unwrap_or(f64::INFINITY * sign_of(c)))
                .collect(),
        }
    }

    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.to_f64().eval(t)
    }
}

fn sign_of(c: &BigInt) -> f64 {
    if c.is_negative() {
        -1.0
    } else {
        1.0
    }
}

impl fmt::Debug for PolyExact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.coeffs.iter().map(|c| c.to_string()))
            .finish()
    }
}

impl fmt::Display for PolyExact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            first = false;
            let show_mag = i == 0 || !mag.is_one();
            match (show_mag, i) {
                (true, 0) => write!(f, "{mag}")?,
                (true, 1) => write!(f, "{mag} t")?,
                (true, _) => write!(f, "{mag} t^{i}")?,
                (false, 1) => f.write_str("t")?,
                (false, _) => write!(f, "t^{i}")?,
            }
        }
        Ok(())
    }
}

/// Floating-point copy of a [`PolyExact`] for repeated evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatPoly {
    coeffs: Vec<f64>,
}

impl FloatPoly {
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation at a complex argument.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * t + c)
    }
}

/// `numerator(t) / (1 - t)^pole_order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalForm {
    pub numerator: PolyExact,
    pub pole_order: usize,
}

impl RationalForm {
    /// Exact derivative, again over a pure power of `(1 - t)`:
    /// `(N'(t)(1-t) + p N(t)) / (1-t)^{p+1}`.
    pub fn derivative(&self) -> RationalForm {
        let p = self.pole_order;
        let lhs = self.numerator.derivative().mul(&PolyExact::one_minus_t_pow(1));
        let rhs = self.numerator.scale(&BigInt::from(p));
        RationalForm {
            numerator: lhs.add(&rhs),
            pole_order: p + 1,
        }
    }

    pub fn eval(&self, t: Complex64) -> Result<Complex64> {
        eval_rational(&self.numerator.to_f64(), self.pole_order, t)
    }
}

pub(crate) fn eval_rational(num: &FloatPoly, pole_order: usize, t: Complex64) -> Result<Complex64> {
    let one_minus = Complex64::new(1.0, 0.0) - t;
    let distance = one_minus.norm();
    if distance < POLE_GUARD {
        return Err(Error::PoleProximity {
            distance,
            guard: POLE_GUARD,
        });
    }
    Ok(num.eval(t) / one_minus.powu(pole_order as u32))
}

fn check_order(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > MAX_ORDER || m > MAX_ORDER {
        return Err(Error::OrderOutOfRange {
            n,
            m,
            limit: MAX_ORDER,
        });
    }
    Ok(())
}

/// The numerator polynomial `A_{n,m}` of the `m`-th derivative of `Li_{-n}`.
pub fn a_poly(n: usize, m: usize) -> Result<PolyExact> {
    check_order(n, m)?;
    let stirling = stirling2_row(n + 1);
    let mut acc = PolyExact::zero();
    for j in 0..=n {
        let mut c = pochhammer(m as i64 + 1, j) * &stirling[j + 1];
        if (n + j) % 2 == 1 {
            c = -c;
        }
        acc = acc.add(&PolyExact::one_minus_t_pow(n - j).scale(&c));
    }
    Ok(acc.scale(&factorial(m)))
}

/// `Li_{-n}(t)` as an exact rational function.
pub fn li_neg_rational(n: usize) -> Result<RationalForm> {
    li_neg_derivative(n, 0)
}

/// `d^m/dt^m Li_{-n}(t) = A_{n,m}(t) / (1-t)^{n+m+1}`.
pub fn li_neg_derivative(n: usize, m: usize) -> Result<RationalForm> {
    Ok(RationalForm {
        numerator: a_poly(n, m)?,
        pole_order: n + m + 1,
    })
}

/// Value of the `m`-th derivative of `Li_{-n}` at `t`.
pub fn f_eval(n: usize, m: usize, t: Complex64) -> Result<Complex64> {
    li_neg_derivative(n, m)?.eval(t)
}

/// Precomputed float numerators for `F_m, F_{m+1}, ..., F_{m+k}` where
/// `F_j = d^j/dt^j Li_{-n}`. Built once, evaluated many times.
#[derive(Debug, Clone)]
pub struct DerivativeLadder {
    n: usize,
    m: usize,
    numerators: Vec<FloatPoly>,
}

impl DerivativeLadder {
    pub fn new(n: usize, m: usize, extra: usize) -> Result<Self> {
        check_order(n, m + extra)?;
        let numerators = (m..=m + extra)
            .map(|j| a_poly(n, j).map(|p| p.to_f64()))
            .collect::<Result<Vec<_>>>()?;
        Ok(DerivativeLadder { n, m, numerators })
    }

    /// `F_{m+k}(t)`.
    pub fn eval(&self, k: usize, t: Complex64) -> Result<Complex64> {
        eval_rational(&self.numerators[k], self.n + self.m + k + 1, t)
    }

    /// `A_{n,m+k}(0)` as a float.
    pub fn at_zero(&self, k: usize) -> f64 {
        self.numerators[k].coeffs().first().copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }
}
