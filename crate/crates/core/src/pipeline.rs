//! Samples → continuation → coefficients → evaluator.
//!
//! The stored grid covers `x_j = j/n` for `j = -n..n-1`; the sample at `x = 1`
//! is not part of it because the continuation reproduces it at `x = -1`, its
//! periodic image.

use num_complex::Complex64;

use crate::error::{FcError, Result};
use crate::finite_diff::StencilTable;
use crate::hermite::{BoundaryDataMatrix, ContinuationSpec, HermiteBasisSet};
use crate::spectral::{self, TrigCoefficients};

/// Where the boundary matrix of an approximant came from.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundarySource {
    /// One-sided differences of accuracy order `p`.
    FiniteDifference { p: usize },
    /// Supplied by the caller (e.g. exact analytic derivatives).
    Supplied,
}

fn grid_size(samples: &[f64]) -> Result<usize> {
    if samples.len() < 3 {
        return Err(FcError::InsufficientSamples {
            have: samples.len(),
            need: 3,
        });
    }
    Ok(samples.len() - 1)
}

/// Extends `f_0..f_n` to the `2n` values at `j/n`, `j = -n..n-1`, using a given boundary matrix.
pub fn continue_with_boundary(samples: &[f64], boundary: &BoundaryDataMatrix) -> Result<Vec<f64>> {
    let n = grid_size(samples)?;
    let basis = HermiteBasisSet::new(boundary.r())?;
    let poly = basis.assemble(boundary)?;
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        out.push(poly.eval(j as f64 / n as f64 - 1.0)?);
    }
    out.extend_from_slice(&samples[..n]);
    Ok(out)
}

/// Discrete continuation with the boundary matrix built from order-`p` differences.
pub fn discrete_continuation(samples: &[f64], r: usize, p: usize) -> Result<Vec<f64>> {
    ContinuationSpec::new(r)?;
    let table = StencilTable::new(r, p)?;
    grid_size(samples)?;
    let boundary = table.boundary_derivatives(samples)?;
    continue_with_boundary(samples, &boundary)
}

/// Interpolating Fourier-continuation approximant of samples on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct FcApproximant {
    coefficients: TrigCoefficients,
    spec: ContinuationSpec,
    source: BoundarySource,
    n: usize,
    boundary: BoundaryDataMatrix,
}

impl FcApproximant {
    /// Builds the approximant with finite-difference boundary data of order `p`.
    pub fn new(samples: &[f64], r: usize, p: usize) -> Result<Self> {
        ContinuationSpec::new(r)?;
        Self::with_stencils(samples, &StencilTable::new(r, p)?)
    }

    pub fn with_stencils(samples: &[f64], stencils: &StencilTable) -> Result<Self> {
        grid_size(samples)?;
        let boundary = stencils.boundary_derivatives(samples)?;
        let mut approx = Self::with_boundary(samples, boundary)?;
        approx.source = BoundarySource::FiniteDifference { p: stencils.p() };
        Ok(approx)
    }

    /// Builds the approximant from a caller-supplied boundary matrix.
    pub fn with_boundary(samples: &[f64], boundary: BoundaryDataMatrix) -> Result<Self> {
        let spec = ContinuationSpec::new(boundary.r())?;
        let extended = continue_with_boundary(samples, &boundary)?;
        let coefficients = spectral::dft_forward(&extended)?;
        Ok(Self {
            n: coefficients.n(),
            coefficients,
            spec,
            source: BoundarySource::Supplied,
            boundary,
        })
    }

    pub fn coefficients(&self) -> &TrigCoefficients {
        &self.coefficients
    }

    pub fn spec(&self) -> ContinuationSpec {
        self.spec
    }

    /// Accuracy order of the differences, if the boundary data came from samples.
    pub fn p(&self) -> Option<usize> {
        match self.source {
            BoundarySource::FiniteDifference { p } => Some(p),
            BoundarySource::Supplied => None,
        }
    }

    pub fn source(&self) -> &BoundarySource {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> &BoundaryDataMatrix {
        &self.boundary
    }

    /// Value of the approximant at `x` in `[0, 1]`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(FcError::DomainViolation { x, lo: 0.0, hi: 1.0 });
        }
        spectral::eval_series(&self.coefficients, x)
    }

    /// Values at `z_j = j/grid`, `j = 0..=grid`.
    pub fn evaluate_dense(&self, grid: usize) -> Result<Vec<f64>> {
        let full = spectral::resample(&self.coefficients, grid)?;
        let mut out = full[grid..].to_vec();
        out.push(spectral::eval_series(&self.coefficients, 1.0)?);
        Ok(out)
    }

    /// Values at `x_j = j/n` for `j = -n..=n`, i.e. the continued data profile.
    pub fn extended_profile(&self, samples: &[f64]) -> Result<Vec<f64>> {
        let mut values = continue_with_boundary(samples, &self.boundary)?;
        values.push(samples[samples.len() - 1]);
        Ok(values)
    }
}

/// Builds the approximant with order-`p` finite-difference boundary data.
pub fn fc_approximate(samples: &[f64], r: usize, p: usize) -> Result<FcApproximant> {
    FcApproximant::new(samples, r, p)
}

/// A continuation that is polynomial on both halves of `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolyContinuation {
    left: Vec<f64>,
    right: Vec<f64>,
}

impl PiecewisePolyContinuation {
    /// `left` is used on `[-1, 0)`, `right` on `[0, 1]`; ascending monomial coefficients.
    pub fn new(left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        if left.is_empty() || right.is_empty() {
            return Err(FcError::EmptyInput);
        }
        if left.iter().chain(&right).any(|c| !c.is_finite()) {
            return Err(FcError::InvalidParameter("non-finite coefficient".into()));
        }
        Ok(Self { left, right })
    }

    /// Order-`r` continuation of the polynomial `right` using its exact boundary data.
    pub fn from_polynomial(right: &[f64], r: usize) -> Result<Self> {
        let basis = HermiteBasisSet::new(r)?;
        let derivative = |m: usize, x: f64| crate::hermite::horner_derivative(right, m, x);
        let boundary = BoundaryDataMatrix::new(
            (0..=r).map(|m| derivative(m, 0.0)).collect(),
            (0..=r).map(|m| derivative(m, 1.0)).collect(),
        )?;
        let left = basis.assemble(&boundary)?.coefficients().to_vec();
        Self::new(left, right.to_vec())
    }

    pub fn left(&self) -> &[f64] {
        &self.left
    }

    pub fn right(&self) -> &[f64] {
        &self.right
    }

    pub fn value(&self, x: f64) -> f64 {
        let coeffs = if x < 0.0 { &self.left } else { &self.right };
        crate::hermite::horner_derivative(coeffs, 0, x)
    }
}

/// Moments `∫_0^1 x^m e^{a x} dx` for `m = 0..=degree`.
///
/// Ascending recurrence while `m <= |a|`, descending recurrence started well
/// above `degree` for the rest; each direction only ever divides by the larger
/// of `|a|` and `m`.
fn unit_moments(a: Complex64, degree: usize) -> Vec<Complex64> {
    if a.norm() == 0.0 {
        return (0..=degree)
            .map(|m| Complex64::new(1.0 / (m + 1) as f64, 0.0))
            .collect();
    }
    let ea = a.exp();
    let mut out = vec![Complex64::new(0.0, 0.0); degree + 1];
    let switch = (a.norm().floor() as usize).min(degree);
    out[0] = (ea - 1.0) / a;
    for m in 1..=switch {
        out[m] = (ea - out[m - 1] * m as f64) / a;
    }
    if switch < degree {
        let mut top = degree + 1;
        let mut damping = 1.0;
        while damping > 1e-20 {
            top += 1;
            damping *= a.norm() / top as f64;
        }
        let mut current = ea / (top + 1) as f64;
        for m in ((degree + 1)..=top).rev() {
            current = (ea - a * current) / m as f64;
        }
        out[degree] = current;
        for m in ((switch + 2)..=degree).rev() {
            out[m - 1] = (ea - a * out[m]) / m as f64;
        }
    }
    out
}

/// `c_k = 1/2 ∫_{-1}^{1} f_c(x) e^{-i pi k x} dx` for a piecewise-polynomial continuation.
pub fn continuous_coefficient_ppoly(fc: &PiecewisePolyContinuation, k: i64) -> Result<Complex64> {
    if k.unsigned_abs() > 1_000_000 {
        return Err(FcError::InvalidParameter(format!(
            "|k| = {} exceeds 10^6",
            k.unsigned_abs()
        )));
    }
    let alpha = Complex64::new(0.0, -std::f64::consts::PI * k as f64);
    let right_moments = unit_moments(alpha, fc.right.len() - 1);
    // ∫_{-1}^0 x^m e^{αx} dx = (-1)^m ∫_0^1 y^m e^{-αy} dy
    let left_moments = unit_moments(-alpha, fc.left.len() - 1);
    let right: Complex64 = fc.right.iter().zip(&right_moments).map(|(c, i)| i * *c).sum();
    let left: Complex64 = fc
        .left
        .iter()
        .zip(&left_moments)
        .enumerate()
        .map(|(m, (c, i))| if m % 2 == 0 { i * *c } else { -(i * *c) })
        .sum();
    Ok((left + right) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=n).map(|j| f(j as f64 / n as f64)).collect()
    }

    #[test]
    fn constant_samples() {
        let samples = vec![2.5; 65];
        let ext = discrete_continuation(&samples, 3, 3).unwrap();
        assert_eq!(ext.len(), 128);
        assert!(ext.iter().all(|v| (v - 2.5).abs() < 1e-13));
        let approx = fc_approximate(&samples, 3, 3).unwrap();
        assert!((approx.coefficients().get(0).re - 2.5).abs() < 1e-13);
        for v in approx.evaluate_dense(256).unwrap() {
            assert!((v - 2.5).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_data_continuations() {
        let n = 64;
        let samples = grid(n, |x| x);
        let r0 = discrete_continuation(&samples, 0, 1).unwrap();
        assert_eq!(r0[0], 1.0);
        for (idx, v) in r0.iter().enumerate() {
            let x = idx as f64 / n as f64 - 1.0;
            assert!((v - x.abs()).abs() < 1e-14);
        }
        let r1 = discrete_continuation(&samples, 1, 2).unwrap();
        assert!((r1[n / 2] - 0.5).abs() < 1e-12);
        for (idx, v) in r1.iter().take(n).enumerate() {
            let x = idx as f64 / n as f64 - 1.0;
            let cubic = 4.0 * x * x * x + 6.0 * x * x + x;
            assert!((v - cubic).abs() < 1e-10);
        }
    }

    #[test]
    fn approximant_interpolates_nodes() {
        for &n in &[64usize, 256, 1024] {
            let samples = grid(n, |x| (20.0 * x).sin() + x * x);
            let approx = fc_approximate(&samples, 4, 4).unwrap();
            assert_eq!(approx.n(), n);
            let norm = samples.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for (j, v) in samples.iter().take(n).enumerate() {
                let y = approx.evaluate(j as f64 / n as f64).unwrap();
                assert!((y - v).abs() <= 1e-11 * norm, "n={n} j={j}");
            }
            let dense = approx.evaluate_dense(n).unwrap();
            for (a, b) in dense.iter().zip(&samples) {
                assert!((a - b).abs() <= 1e-11 * norm);
            }
        }
    }

    #[test]
    fn dense_matches_pointwise() {
        let samples = grid(64, |x| (3.0 * x).exp());
        let approx = fc_approximate(&samples, 2, 3).unwrap();
        let dense = approx.evaluate_dense(512).unwrap();
        assert_eq!(dense.len(), 513);
        for (j, v) in dense.iter().enumerate() {
            let y = approx.evaluate(j as f64 / 512.0).unwrap();
            assert!((v - y).abs() <= 1e-12 * approx.coefficients().max_abs().max(1.0));
        }
        assert!(approx.evaluate_dense(32).is_err());
        assert!(approx.evaluate(1.5).is_err());
    }

    #[test]
    fn preconditions() {
        assert!(matches!(
            discrete_continuation(&[1.0, 2.0], 0, 1),
            Err(FcError::InsufficientSamples { .. })
        ));
        assert!(matches!(
            discrete_continuation(&[0.0; 6], 4, 4),
            Err(FcError::InsufficientSamples { .. })
        ));
        assert!(matches!(
            discrete_continuation(&[0.0; 200], 31, 1),
            Err(FcError::UnsupportedOrder { .. })
        ));
    }

    #[test]
    fn constant_coefficients() {
        let fc = PiecewisePolyContinuation::new(vec![1.0], vec![1.0]).unwrap();
        assert!((continuous_coefficient_ppoly(&fc, 0).unwrap() - 1.0).norm() < 1e-15);
        for k in 1..20 {
            assert!(continuous_coefficient_ppoly(&fc, k).unwrap().norm() < 1e-15);
            assert!(continuous_coefficient_ppoly(&fc, -k).unwrap().norm() < 1e-15);
        }
    }

    #[test]
    fn triangle_wave_coefficients() {
        let fc = PiecewisePolyContinuation::from_polynomial(&[0.0, 1.0], 0).unwrap();
        assert_eq!(fc.left(), &[0.0, -1.0]);
        assert!((continuous_coefficient_ppoly(&fc, 0).unwrap().re - 0.5).abs() < 1e-15);
        for k in 1..=40i64 {
            let expected = (if k % 2 == 0 { 1.0 } else { -1.0 } - 1.0) / (PI * PI * (k * k) as f64);
            let c = continuous_coefficient_ppoly(&fc, k).unwrap();
            assert!((c.re - expected).abs() < 1e-15 && c.im.abs() < 1e-15, "k={k}: {c}");
        }
        // dense DFT of the triangle converges to the same values at O(1/n^2)
        let n = 1 << 12;
        let dense: Vec<f64> = (0..2 * n)
            .map(|i| fc.value(i as f64 / n as f64 - 1.0))
            .collect();
        let c = spectral::dft_forward(&dense).unwrap();
        assert!((c.get(1).re + 2.0 / (PI * PI)).abs() < 1e-6);
    }

    #[test]
    fn moments_agree_with_integration_by_parts() {
        // for |pi k| well above the degree, repeated integration by parts is accurate
        let fc = PiecewisePolyContinuation::from_polynomial(&[0.3, -1.0, 0.5, 2.0], 3).unwrap();
        for k in [40i64, 97, 300] {
            let alpha = Complex64::new(0.0, -PI * k as f64);
            let antiderivative = |coeffs: &[f64], x: f64| {
                let mut acc = Complex64::new(0.0, 0.0);
                let mut apow = alpha;
                for j in 0..coeffs.len() {
                    let d = crate::hermite::horner_derivative(coeffs, j, x);
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * d / apow;
                    apow *= alpha;
                }
                acc * (alpha * x).exp()
            };
            let right = antiderivative(fc.right(), 1.0) - antiderivative(fc.right(), 0.0);
            let left = antiderivative(fc.left(), 0.0) - antiderivative(fc.left(), -1.0);
            let expected = (left + right) * 0.5;
            let got = continuous_coefficient_ppoly(&fc, k).unwrap();
            // the coefficient is a heavy cancellation, so bound by roundoff in the summands
            let scale: f64 = fc.left().iter().chain(fc.right()).map(|c| c.abs()).sum();
            assert!((got - expected).norm() <= 1e-15 * scale, "k={k} got={got} expected={expected}");
        }
    }

    #[test]
    fn high_degree_small_k_is_stable() {
        // x^40 on [0, 1], zero on the left: c_1 = 1/2 ∫_0^1 x^40 e^{-i pi x} dx
        let mut right = vec![0.0; 41];
        right[40] = 1.0;
        let fc = PiecewisePolyContinuation::new(vec![0.0], right).unwrap();
        let got = continuous_coefficient_ppoly(&fc, 1).unwrap();
        // composite Simpson oracle
        let steps = 20_000;
        let h = 1.0 / steps as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=steps {
            let x = i as f64 * h;
            let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * x.powi(40) * Complex64::from_polar(1.0, -PI * x);
        }
        let expected = acc * (h / 3.0) * 0.5;
        assert!((got - expected).norm() < 1e-10 * expected.norm(), "{got} vs {expected}");
    }
}
