//! Two-point Hermite continuation polynomial on `[-1, 0]`.
//!
//! For a 2×(r+1) boundary matrix `F` the continuation `P_r(F)` is the unique
//! polynomial of degree `2r+1` whose derivatives of order `0..=r` equal row 0
//! of `F` at `x = 0` and row 1 of `F` at `x = -1`. Gluing it to the left of
//! `f` on `[0, 1]` yields a function that is `C^r` across both junctions of
//! the period-2 extension.
//!
//! The basis polynomials are expanded with exact integer arithmetic and only
//! converted to floating point at the end. Each basis polynomial is stored in
//! two monomial expansions, one about `x = 0` and one about `x = -1`, so that
//! Horner evaluation always runs on a variable of magnitude at most `1/2`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{FcError, Result};

/// Largest supported continuation order.
pub const R_MAX: usize = 30;

/// Width of the periodic extension interval; the continuation lives on `[1 - b, 0]`.
pub const EXTENSION_WIDTH: f64 = 2.0;

/// Order and extension width of a continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationSpec {
    r: usize,
    b: f64,
}

impl ContinuationSpec {
    pub fn new(r: usize) -> Result<Self> {
        if r > R_MAX {
            return Err(FcError::UnsupportedOrder { r, max: R_MAX });
        }
        Ok(Self {
            r,
            b: EXTENSION_WIDTH,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn b(&self) -> f64 {
        self.b
    }
}

/// Endpoint derivative data: row 0 holds `f^(m)(0)`, row 1 holds `f^(m)(1)`, `m = 0..=r`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDataMatrix {
    rows: [Vec<f64>; 2],
}

impl BoundaryDataMatrix {
    pub fn new(left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.is_empty() || left.len() != right.len() {
            return Err(FcError::InvalidParameter(format!(
                "boundary rows must be non-empty and of equal length (got {} and {})",
                left.len(),
                right.len()
            )));
        }
        if let Some(v) = left.iter().chain(&right).find(|v| !v.is_finite()) {
            return Err(FcError::InvalidParameter(format!(
                "boundary entry {v} is not finite"
            )));
        }
        Ok(Self { rows: [left, right] })
    }

    pub fn zeros(r: usize) -> Self {
        Self {
            rows: [vec![0.0; r + 1], vec![0.0; r + 1]],
        }
    }

    pub fn r(&self) -> usize {
        self.rows[0].len() - 1
    }

    /// Entry `f_{jm}`; `j = 0` is the endpoint `x = 0`, `j = 1` the endpoint `x = 1`.
    pub fn entry(&self, j: usize, m: usize) -> f64 {
        self.rows[j][m]
    }

    pub fn set(&mut self, j: usize, m: usize, value: f64) {
        self.rows[j][m] = value;
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn max_norm(&self) -> f64 {
        self.rows
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        self.check_order(other)?;
        let combine = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect()
        };
        Self::new(
            combine(&self.rows[0], &other.rows[0]),
            combine(&self.rows[1], &other.rows[1]),
        )
    }

    /// `‖self - other‖_max`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_order(other)?;
        Ok(self
            .rows
            .iter()
            .zip(&other.rows)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.r() != other.r() {
            return Err(FcError::OrderMismatch {
                left: self.r(),
                right: other.r(),
            });
        }
        Ok(())
    }
}

/// Largest `s` such that columns `0..=s` of `approx` and `exact` agree within `tol`,
/// or `-1` when column 0 already differs.
pub fn s_exactness(approx: &BoundaryDataMatrix, exact: &BoundaryDataMatrix, tol: f64) -> Result<i64> {
    approx.check_order(exact)?;
    let mut s = -1;
    for m in 0..=approx.r() {
        let agrees = (0..2).all(|j| (approx.entry(j, m) - exact.entry(j, m)).abs() <= tol);
        if !agrees {
            break;
        }
        s = m as i64;
    }
    Ok(s)
}

/// Exact binomial coefficient `C(i, j)` for `j <= i <= 2 R_MAX + 2`.
pub fn binomial(i: usize, j: usize) -> Result<u128> {
    if j > i || i > 2 * R_MAX + 2 {
        return Err(FcError::InvalidParameter(format!(
            "binomial({i}, {j}) requires j <= i <= {}",
            2 * R_MAX + 2
        )));
    }
    Ok(binomial_unchecked(i, j))
}

fn binomial_unchecked(i: usize, j: usize) -> u128 {
    let j = j.min(i - j);
    // each partial product is itself a binomial coefficient, so the division is exact
    (0..j).fold(1u128, |acc, k| acc * (i - k) as u128 / (k + 1) as u128)
}

/// Checks `sum_{k=0}^{n} (-1)^k C(r+1, k) C(r+n-k, r) == 0` in exact integer arithmetic.
pub fn verify_binomial_identity(r: usize, n: usize) -> Result<bool> {
    if r > R_MAX {
        return Err(FcError::UnsupportedOrder { r, max: R_MAX });
    }
    if n == 0 || n > r + 1 {
        return Err(FcError::InvalidParameter(format!(
            "identity requires 1 <= n <= r + 1 (r = {r}, n = {n})"
        )));
    }
    let mut sum: i128 = 0;
    for k in 0..=n {
        let term = (binomial(r + 1, k)? * binomial(r + n - k, r)?) as i128;
        sum += if k % 2 == 0 { term } else { -term };
    }
    Ok(sum == 0)
}

/// `2 C(2r+2, r)`, a bound on the operator norm of the continuation map
/// with respect to the max-norm on boundary matrices.
pub fn operator_norm_bound(r: usize) -> Result<f64> {
    if r > R_MAX {
        return Err(FcError::UnsupportedOrder { r, max: R_MAX });
    }
    Ok(2.0 * binomial(2 * r + 2, r)? as f64)
}

// Exact integer polynomial helpers, coefficients in ascending powers.

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add_scaled(acc: &mut Vec<BigInt>, p: &[BigInt], scale: &BigInt) {
    if acc.len() < p.len() {
        acc.resize(p.len(), BigInt::zero());
    }
    for (a, c) in acc.iter_mut().zip(p) {
        *a += c * scale;
    }
}

/// `(1 + x)^k`
fn one_plus_x_pow(k: usize) -> Vec<BigInt> {
    (0..=k)
        .map(|i| BigInt::from(binomial_unchecked(k, i)))
        .collect()
}

/// `(s x)^k` with `s = ±1`
fn monomial(k: usize, negative: bool) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); k + 1];
    out[k] = if negative && k % 2 == 1 {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    out
}

/// Re-expands `p(x)` in powers of `u = 1 + x`, i.e. returns `q` with `q(u) = p(u - 1)`.
fn shift_to_minus_one(p: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); p.len()];
    for (i, a) in p.iter().enumerate() {
        for (j, slot) in out.iter_mut().enumerate().take(i + 1) {
            let c = BigInt::from(binomial_unchecked(i, j));
            if (i - j) % 2 == 0 {
                *slot += a * c;
            } else {
                *slot -= a * c;
            }
        }
    }
    out
}

fn to_f64_over(p: &[BigInt], denom: &BigInt, len: usize) -> Vec<f64> {
    let mut out: Vec<f64> = p
        .iter()
        .map(|c| {
            BigRational::new(c.clone(), denom.clone())
                .to_f64()
                .expect("finite rational")
        })
        .collect();
    out.resize(len, 0.0);
    out
}

fn factorial_big(m: usize) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// The `2r + 2` basis polynomials `P_m^0`, `P_m^1` of the continuation.
///
/// `P_m^0` carries the derivative data at `x = 0` and `P_m^1` the data at
/// `x = -1`:
///
/// ```text
/// (P_m^0)^(l)(0) = δ_lm,  (P_m^0)^(l)(-1) = 0,
/// (P_m^1)^(l)(0) = 0,     (P_m^1)^(l)(-1) = δ_lm,   0 <= l, m <= r.
/// ```
#[derive(Debug, Clone)]
pub struct HermiteBasisSet {
    r: usize,
    basis0: Vec<Vec<f64>>,
    basis1: Vec<Vec<f64>>,
    basis0_shifted: Vec<Vec<f64>>,
    basis1_shifted: Vec<Vec<f64>>,
    binomials: Vec<Vec<u128>>,
}

impl HermiteBasisSet {
    pub fn new(r: usize) -> Result<Self> {
        if r > R_MAX {
            return Err(FcError::UnsupportedOrder { r, max: R_MAX });
        }
        let len = 2 * r + 2;
        let binomials: Vec<Vec<u128>> = (0..=len)
            .map(|i| (0..=i).map(|j| binomial_unchecked(i, j)).collect())
            .collect();
        let mut basis0 = Vec::with_capacity(r + 1);
        let mut basis1 = Vec::with_capacity(r + 1);
        let mut basis0_shifted = Vec::with_capacity(r + 1);
        let mut basis1_shifted = Vec::with_capacity(r + 1);
        for m in 0..=r {
            let denom = factorial_big(m);

            // m! P_m^0(x) = x^m (1+x)^{r+1} sum_n (-1)^n C(r+n, n) x^n
            let mut tail = Vec::new();
            for n in 0..=(r - m) {
                let c = BigInt::from(binomial_unchecked(r + n, n));
                poly_add_scaled(&mut tail, &monomial(n, true), &c);
            }
            let p0 = poly_mul(&poly_mul(&monomial(m, false), &one_plus_x_pow(r + 1)), &tail);

            // m! P_m^1(x) = (1+x)^m (-x)^{r+1} sum_n C(r+n, n) (1+x)^n
            let mut tail = Vec::new();
            for n in 0..=(r - m) {
                let c = BigInt::from(binomial_unchecked(r + n, n));
                poly_add_scaled(&mut tail, &one_plus_x_pow(n), &c);
            }
            let p1 = poly_mul(&poly_mul(&one_plus_x_pow(m), &monomial(r + 1, true)), &tail);

            basis0_shifted.push(to_f64_over(&shift_to_minus_one(&p0), &denom, len));
            basis1_shifted.push(to_f64_over(&shift_to_minus_one(&p1), &denom, len));
            basis0.push(to_f64_over(&p0, &denom, len));
            basis1.push(to_f64_over(&p1, &denom, len));
        }
        Ok(Self {
            r,
            basis0,
            basis1,
            basis0_shifted,
            basis1_shifted,
            binomials,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    /// Monomial coefficients (ascending powers of `x`) of `P_m^j`.
    pub fn coefficients(&self, j: usize, m: usize) -> &[f64] {
        match j {
            0 => &self.basis0[m],
            _ => &self.basis1[m],
        }
    }

    /// Monomial coefficients of `P_m^j` in ascending powers of `1 + x`.
    pub fn shifted_coefficients(&self, j: usize, m: usize) -> &[f64] {
        match j {
            0 => &self.basis0_shifted[m],
            _ => &self.basis1_shifted[m],
        }
    }

    /// Exact binomial table `C(i, j)` for `i <= 2r + 2`.
    pub fn binomial(&self, i: usize, j: usize) -> u128 {
        self.binomials[i][j]
    }

    /// Collapses `sum_m f_{0m} P_m^0 + f_{1m} P_m^1` into a single polynomial.
    pub fn assemble(&self, data: &BoundaryDataMatrix) -> Result<ContinuationPolynomial> {
        if data.r() != self.r {
            return Err(FcError::OrderMismatch {
                left: data.r(),
                right: self.r,
            });
        }
        let len = 2 * self.r + 2;
        let mut about_zero = vec![0.0; len];
        let mut about_minus_one = vec![0.0; len];
        for m in 0..=self.r {
            for j in 0..2 {
                let w = data.entry(j, m);
                if w == 0.0 {
                    continue;
                }
                for (acc, c) in about_zero.iter_mut().zip(self.coefficients(j, m)) {
                    *acc += w * c;
                }
                for (acc, c) in about_minus_one
                    .iter_mut()
                    .zip(self.shifted_coefficients(j, m))
                {
                    *acc += w * c;
                }
            }
        }
        Ok(ContinuationPolynomial {
            about_zero,
            about_minus_one,
        })
    }
}

/// A continuation `P_r(F)` on `[-1, 0]`, held as two monomial expansions.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationPolynomial {
    about_zero: Vec<f64>,
    about_minus_one: Vec<f64>,
}

impl ContinuationPolynomial {
    /// Coefficients in ascending powers of `x`.
    pub fn coefficients(&self) -> &[f64] {
        &self.about_zero
    }

    pub fn degree(&self) -> usize {
        self.about_zero.len() - 1
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        self.derivative(0, x)
    }

    /// `ell`-th derivative at `x`, obtained by differentiating the monomial coefficients.
    pub fn derivative(&self, ell: usize, x: f64) -> Result<f64> {
        check_domain(x)?;
        if ell > self.degree() {
            return Err(FcError::InvalidParameter(format!(
                "derivative order {ell} exceeds polynomial degree {}",
                self.degree()
            )));
        }
        let (coeffs, t) = if x >= -0.5 {
            (&self.about_zero, x)
        } else {
            (&self.about_minus_one, 1.0 + x)
        };
        Ok(horner_derivative(coeffs, ell, t))
    }
}

fn check_domain(x: f64) -> Result<()> {
    if !(-1.0..=0.0).contains(&x) {
        return Err(FcError::DomainViolation { x, lo: -1.0, hi: 0.0 });
    }
    Ok(())
}

/// Horner evaluation of the `ell`-th derivative of `sum_i c_i t^i`.
pub(crate) fn horner_derivative(coeffs: &[f64], ell: usize, t: f64) -> f64 {
    let mut acc = 0.0;
    for i in (ell..coeffs.len()).rev() {
        let falling = ((i - ell + 1)..=i).fold(1.0, |f, k| f * k as f64);
        acc = acc * t + coeffs[i] * falling;
    }
    acc
}

/// `P_r(F)(x)` for `x` in `[-1, 0]`.
pub fn eval_continuation(data: &BoundaryDataMatrix, basis: &HermiteBasisSet, x: f64) -> Result<f64> {
    check_domain(x)?;
    basis.assemble(data)?.eval(x)
}

/// `ell`-th derivative of `P_r(F)` at `x`, for `ell <= 2r + 1`.
pub fn eval_continuation_derivative(
    data: &BoundaryDataMatrix,
    basis: &HermiteBasisSet,
    ell: usize,
    x: f64,
) -> Result<f64> {
    check_domain(x)?;
    basis.assemble(data)?.derivative(ell, x)
}

/// Closed-form `ell`-th derivative of a single basis polynomial `P_m^j` at `x`.
///
/// Derived by applying the Leibniz rule to the factored form, independent of
/// the monomial expansion; used to cross-check it.
pub fn basis_derivative_closed_form(r: usize, j: usize, m: usize, ell: usize, x: f64) -> Result<f64> {
    if r > R_MAX {
        return Err(FcError::UnsupportedOrder { r, max: R_MAX });
    }
    if m > r || j > 1 || ell > 2 * r + 1 {
        return Err(FcError::InvalidParameter(format!(
            "closed form needs m <= r, j <= 1, ell <= 2r + 1 (r = {r}, j = {j}, m = {m}, ell = {ell})"
        )));
    }
    check_domain(x)?;
    let c = |a: usize, b: usize| -> f64 {
        if b > a {
            0.0
        } else {
            binomial_unchecked(a, b) as f64
        }
    };
    let factorial = |k: usize| (1..=k).fold(1.0, |f, i| f * i as f64);
    let (outer, inner) = if j == 0 { (1.0 + x, x) } else { (x, 1.0 + x) };
    let mut total = 0.0;
    for k in 0..=ell.min(r + 1) {
        let shift = (ell - k) as i64 - m as i64;
        let n_start = shift.max(0) as usize;
        let mut inner_sum = 0.0;
        for n in n_start..=(r - m) {
            let sign = if j == 0 && n % 2 == 1 { -1.0 } else { 1.0 };
            inner_sum += sign
                * c(r + n, n)
                * c(m + n, ell - k)
                * inner.powi((n as i64 - shift) as i32);
        }
        total += c(r + 1, k) * outer.powi((r + 1 - k) as i32) * inner_sum;
    }
    let sign = if j == 1 && (r + 1) % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * factorial(ell) / factorial(m) * total)
}
