//! One-sided finite-difference stencils and boundary data from grid samples.
//!
//! A stencil for derivative order `m` and accuracy order `p` uses the `m + p`
//! nodes `0, 1, .., m + p - 1` (in units of the grid step). Its weights are the
//! unique solution of the moment system
//!
//! ```text
//! sum_k w_k k^q = q! δ_qm,   q = 0 .. m + p - 1,
//! ```
//!
//! solved in exact rational arithmetic. The forward operator at `x_0` is
//! `n^m sum_k w_k f_k` and the backward operator at `x_n` is
//! `(-n)^m sum_k w_k f_{n-k}`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{FcError, Result};
use crate::hermite::BoundaryDataMatrix;

/// Upper bound on `m + p`.
pub const MAX_STENCIL_LEN: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Forward,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StencilSpec {
    pub m: usize,
    pub p: usize,
    pub side: Side,
}

impl StencilSpec {
    pub fn new(m: usize, p: usize, side: Side) -> Result<Self> {
        let spec = Self { m, p, side };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.m == 0 || self.p == 0 || self.m + self.p > MAX_STENCIL_LEN {
            return Err(FcError::UnsupportedStencil {
                m: self.m,
                p: self.p,
            });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.m + self.p
    }

    /// Always false: a valid stencil has at least two points.
    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Weights `(a_p^m)_k`, `k = 0..m+p`, exact and rounded.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    spec: StencilSpec,
    exact: Vec<BigRational>,
    weights: Vec<f64>,
}

impl Stencil {
    pub fn spec(&self) -> StencilSpec {
        self.spec
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exact_weights(&self) -> &[BigRational] {
        &self.exact
    }

    /// Applies the operator to `samples` on a grid of step `1/n`.
    ///
    /// Forward stencils read `samples[0..]`, backward stencils read
    /// `samples[n], samples[n-1], ..`.
    pub fn apply(&self, samples: &[f64]) -> Result<f64> {
        let len = self.spec.len();
        if samples.len() < len {
            return Err(FcError::InsufficientSamples {
                have: samples.len(),
                need: len,
            });
        }
        let n = (samples.len() - 1) as f64;
        let m = self.spec.m as i32;
        let (scale, sum) = match self.spec.side {
            Side::Forward => (
                n.powi(m),
                self.weights.iter().zip(samples).map(|(w, f)| w * f).sum::<f64>(),
            ),
            Side::Backward => (
                (-n).powi(m),
                self.weights
                    .iter()
                    .zip(samples.iter().rev())
                    .map(|(w, f)| w * f)
                    .sum::<f64>(),
            ),
        };
        Ok(scale * sum)
    }

    /// Adds `delta` to every weight. Breaks the moment conditions; only
    /// useful as a negative control.
    pub fn perturbed(&self, delta: f64) -> Self {
        Self {
            spec: self.spec,
            exact: self.exact.clone(),
            weights: self.weights.iter().map(|w| w + delta).collect(),
        }
    }
}

impl fmt::Display for Stencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.exact.iter().map(|w| w.to_string()).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// Solves the moment system for `spec` in exact rational arithmetic.
pub fn make_stencil(spec: StencilSpec) -> Result<Stencil> {
    spec.validate()?;
    let len = spec.len();
    // augmented matrix: row q is [0^q, 1^q, .., (len-1)^q | q! δ_qm]
    let mut rows: Vec<Vec<BigRational>> = (0..len)
        .map(|q| {
            let mut row: Vec<BigRational> = (0..len)
                .map(|k| BigRational::from_integer(BigInt::from(k).pow(q as u32)))
                .collect();
            let rhs = if q == spec.m {
                (1..=q).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
            } else {
                BigInt::zero()
            };
            row.push(BigRational::from_integer(rhs));
            row
        })
        .collect();

    for col in 0..len {
        let pivot = (col..len)
            .find(|&r| !rows[r][col].is_zero())
            .expect("moment matrix is nonsingular");
        rows.swap(col, pivot);
        let inv = rows[col][col].recip();
        for v in rows[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[col].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &factor * pv;
            }
        }
    }
    let exact: Vec<BigRational> = rows.into_iter().map(|mut row| row.pop().unwrap()).collect();
    debug_assert!(moment_residuals_vanish(&exact, spec.m));
    let weights = exact
        .iter()
        .map(|w| w.to_f64().expect("finite weight"))
        .collect();
    Ok(Stencil {
        spec,
        exact,
        weights,
    })
}

/// Checks `sum_k w_k k^q == q! δ_qm` exactly for `q < weights.len()`.
pub fn moment_residuals_vanish(weights: &[BigRational], m: usize) -> bool {
    (0..weights.len()).all(|q| {
        let lhs = weights
            .iter()
            .enumerate()
            .fold(BigRational::zero(), |acc, (k, w)| {
                acc + w * BigRational::from_integer(BigInt::from(k).pow(q as u32))
            });
        let rhs = if q == m {
            BigRational::from_integer((1..=q).fold(BigInt::one(), |acc, i| acc * BigInt::from(i)))
        } else {
            BigRational::zero()
        };
        lhs == rhs
    })
}

/// Forward and backward stencils for derivative orders `1..=r` at accuracy `p`.
#[derive(Debug, Clone)]
pub struct StencilTable {
    r: usize,
    p: usize,
    forward: Vec<Stencil>,
    backward: Vec<Stencil>,
}

impl StencilTable {
    pub fn new(r: usize, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(FcError::UnsupportedStencil { m: 1, p });
        }
        let mut forward = Vec::with_capacity(r);
        let mut backward = Vec::with_capacity(r);
        for m in 1..=r {
            let stencil = make_stencil(StencilSpec::new(m, p, Side::Forward)?)?;
            let mut reflected = stencil.clone();
            reflected.spec.side = Side::Backward;
            forward.push(stencil);
            backward.push(reflected);
        }
        Ok(Self {
            r,
            p,
            forward,
            backward,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn forward(&self, m: usize) -> &Stencil {
        &self.forward[m - 1]
    }

    pub fn backward(&self, m: usize) -> &Stencil {
        &self.backward[m - 1]
    }

    /// Minimum number of samples `n + 1` the table can be applied to.
    pub fn required_samples(&self) -> usize {
        (self.r + self.p).max(2)
    }

    /// Copy of the table with every weight shifted by `delta`.
    pub fn perturbed(&self, delta: f64) -> Self {
        Self {
            r: self.r,
            p: self.p,
            forward: self.forward.iter().map(|s| s.perturbed(delta)).collect(),
            backward: self.backward.iter().map(|s| s.perturbed(delta)).collect(),
        }
    }

    /// The 0-exact boundary matrix `F_{n,p}` for samples `f_0..f_n` at `x_j = j/n`.
    pub fn boundary_derivatives(&self, samples: &[f64]) -> Result<BoundaryDataMatrix> {
        let need = self.required_samples();
        if samples.len() < need {
            return Err(FcError::InsufficientSamples {
                have: samples.len(),
                need,
            });
        }
        let n = samples.len() - 1;
        let mut left = Vec::with_capacity(self.r + 1);
        let mut right = Vec::with_capacity(self.r + 1);
        left.push(samples[0]);
        right.push(samples[n]);
        for m in 1..=self.r {
            left.push(self.forward(m).apply(samples)?);
            right.push(self.backward(m).apply(samples)?);
        }
        BoundaryDataMatrix::new(left, right)
    }
}

/// The 0-exact boundary matrix from samples `f_0..f_n` using order-`p` one-sided differences.
pub fn boundary_derivatives(samples: &[f64], r: usize, p: usize) -> Result<BoundaryDataMatrix> {
    StencilTable::new(r, p)?.boundary_derivatives(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn forward(m: usize, p: usize) -> Stencil {
        make_stencil(StencilSpec::new(m, p, Side::Forward).unwrap()).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn known_stencils() {
        assert_eq!(forward(1, 1).exact_weights(), &[rat(-1, 1), rat(1, 1)]);
        assert_eq!(
            forward(1, 2).exact_weights(),
            &[rat(-3, 2), rat(2, 1), rat(-1, 2)]
        );
        assert_eq!(
            forward(2, 2).exact_weights(),
            &[rat(2, 1), rat(-5, 1), rat(4, 1), rat(-1, 1)]
        );
        assert_eq!(forward(1, 2).weights(), &[-1.5, 2.0, -0.5]);
        assert_eq!(forward(1, 2).to_string(), "-3/2, 2, -1/2");
    }

    #[test]
    fn moment_conditions_exact() {
        for m in 1..=8 {
            for p in 1..=(12 - m) {
                let s = forward(m, p);
                assert!(moment_residuals_vanish(s.exact_weights(), m), "m={m} p={p}");
                let total: BigRational = s.exact_weights().iter().cloned().sum();
                assert!(total.is_zero());
            }
        }
    }

    #[test]
    fn guard_rejects_bad_specs() {
        assert!(StencilSpec::new(0, 2, Side::Forward).is_err());
        assert!(StencilSpec::new(2, 0, Side::Forward).is_err());
        assert!(StencilSpec::new(40, 25, Side::Backward).is_err());
        assert!(StencilSpec::new(40, 24, Side::Backward).is_ok());
    }

    #[test]
    fn constant_samples_give_zero_derivatives() {
        let samples = vec![5.0; 33];
        let f = boundary_derivatives(&samples, 4, 3).unwrap();
        for j in 0..2 {
            assert_eq!(f.entry(j, 0), 5.0);
            for m in 1..=4 {
                // weights sum to zero exactly; only rounding scaled by n^m survives
                let bound = 1e-13 * 5.0 * 32f64.powi(m as i32);
                assert!(f.entry(j, m).abs() <= bound, "m={m}: {}", f.entry(j, m));
            }
        }
    }

    #[test]
    fn linear_samples() {
        let n = 40;
        let samples: Vec<f64> = (0..=n).map(|j| j as f64 / n as f64).collect();
        for r in 1..=4 {
            for p in 1..=4 {
                let f = boundary_derivatives(&samples, r, p).unwrap();
                assert_eq!(f.entry(0, 0), 0.0);
                assert_eq!(f.entry(1, 0), 1.0);
                assert!((f.entry(0, 1) - 1.0).abs() < 1e-10);
                assert!((f.entry(1, 1) - 1.0).abs() < 1e-10);
                for m in 2..=r {
                    assert!(f.entry(0, m).abs() < 1e-10 * (n as f64).powi(m as i32));
                    assert!(f.entry(1, m).abs() < 1e-10 * (n as f64).powi(m as i32));
                }
            }
        }
    }

    #[test]
    fn polynomial_reproduction_at_both_ends() {
        // f(x) = (x - 0.3)^d with d = m + p - 1 is differentiated exactly
        for m in 1..=4 {
            for p in 1..=4 {
                let d = (m + p - 1) as i32;
                let n = 24;
                let samples: Vec<f64> = (0..=n)
                    .map(|j| (j as f64 / n as f64 - 0.3).powi(d))
                    .collect();
                let falling = ((d - m as i32 + 1)..=d).fold(1.0, |acc, k| acc * k as f64);
                let exact = |x: f64| falling * (x - 0.3).powi(d - m as i32);
                let fwd = forward(m, p);
                let mut bwd = fwd.clone();
                bwd.spec.side = Side::Backward;
                let a = fwd.apply(&samples).unwrap();
                let b = bwd.apply(&samples).unwrap();
                let tol = |e: f64| 1e-9 * e.abs().max(1.0);
                assert!((a - exact(0.0)).abs() <= tol(exact(0.0)), "m={m} p={p}: {a}");
                assert!((b - exact(1.0)).abs() <= tol(exact(1.0)), "m={m} p={p}: {b}");
            }
        }
    }

    #[test]
    fn insufficient_samples() {
        let samples = vec![1.0; 5];
        assert!(matches!(
            boundary_derivatives(&samples, 3, 3),
            Err(FcError::InsufficientSamples { have: 5, need: 6 })
        ));
        assert!(boundary_derivatives(&[1.0; 6], 3, 3).is_ok());
    }

    #[test]
    fn sin20_boundary_error_has_order_p() {
        let exact = |m: usize, x: f64| 20f64.powi(m as i32) * (20.0 * x + m as f64 * std::f64::consts::FRAC_PI_2).sin();
        let err = |n: usize| {
            let samples: Vec<f64> = (0..=n).map(|j| (20.0 * j as f64 / n as f64).sin()).collect();
            let f = boundary_derivatives(&samples, 3, 3).unwrap();
            let e = BoundaryDataMatrix::new(
                (0..=3).map(|m| exact(m, 0.0)).collect(),
                (0..=3).map(|m| exact(m, 1.0)).collect(),
            )
            .unwrap();
            f.max_abs_diff(&e).unwrap()
        };
        let ratio = err(256) / err(512);
        assert!((ratio - 8.0).abs() < 1.0, "ratio {ratio}");
    }
}
