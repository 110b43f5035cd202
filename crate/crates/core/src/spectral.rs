//! Trigonometric interpolation on the period-2 grid `x_j = j/n`, `j = -n..n-1`.
//!
//! Coefficients follow
//!
//! ```text
//! c_k = 1/(2n) sum_{j=-n}^{n-1} g_j exp(-i pi j k / n),   k = -n .. n-1,
//! ```
//!
//! and the series is `Re sum_k c_k exp(i pi k x)`. The unpaired Nyquist mode
//! `k = -n` contributes `Re(c_{-n}) cos(pi n x)`, which keeps the series real
//! and still interpolates at every node.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FcError, Result};

/// Iterative in-place radix-2 transform with a precomputed twiddle table.
#[derive(Debug, Clone)]
pub struct Radix2Fft {
    len: usize,
    twiddles: Vec<Complex64>,
}

impl Radix2Fft {
    /// Panics unless `len` is a power of two.
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "radix-2 length must be a power of two");
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / len as f64))
            .collect();
        Self { len, twiddles }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized transform `X_k = sum_j x_j exp(∓2 pi i jk/len)`; the sign is `+` when `inverse`.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.len);
        let n = self.len;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut size = 2;
        while size <= n {
            let half = size / 2;
            let stride = n / size;
            for start in (0..n).step_by(size) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            size *= 2;
        }
    }
}

/// Coefficients `c_k`, `k = -n..n-1`, of a period-2 trigonometric polynomial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigCoefficients {
    values: Vec<Complex64>,
}

impl TrigCoefficients {
    /// `values[i]` is `c_{i-n}`; the length must be even and non-zero.
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(FcError::InvalidParameter(format!(
                "coefficient vector length {} must be even and positive",
                values.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn n(&self) -> usize {
        self.values.len() / 2
    }

    /// `c_k` for `-n <= k < n`.
    pub fn get(&self, k: i64) -> Complex64 {
        self.values[(k + self.n() as i64) as usize]
    }

    /// Coefficients in order `k = -n..n-1`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let n = self.n() as i64;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, c)| (i as i64 - n, *c))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn sign_alternate(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `c_k` of the samples `g_j`, `j = -n..n-1` (stored from `j = -n`).
///
/// Uses the radix-2 path when `2n` is a power of two and the direct sum otherwise.
pub fn dft_forward(samples: &[f64]) -> Result<TrigCoefficients> {
    let len = samples.len();
    if len == 0 {
        return Err(FcError::EmptyInput);
    }
    if !len.is_multiple_of(2) {
        return Err(FcError::InvalidParameter(format!(
            "sample count {len} must be even"
        )));
    }
    if !len.is_power_of_two() {
        return naive_dft_forward(samples);
    }
    let n = len / 2;
    let mut data: Vec<Complex64> = samples.iter().map(|&g| Complex64::new(g, 0.0)).collect();
    Radix2Fft::new(len).process(&mut data, false);
    // shifting j -> j + n multiplies slot k by exp(i pi k) = (-1)^k
    let scale = 1.0 / len as f64;
    let values = (0..len)
        .map(|i| {
            let slot = (i + n) % len;
            data[slot] * (scale * sign_alternate(slot))
        })
        .collect();
    TrigCoefficients::new(values)
}

/// Direct `O(n^2)` evaluation of the coefficient sum.
pub fn naive_dft_forward(samples: &[f64]) -> Result<TrigCoefficients> {
    let len = samples.len();
    if len == 0 {
        return Err(FcError::EmptyInput);
    }
    if !len.is_multiple_of(2) {
        return Err(FcError::InvalidParameter(format!(
            "sample count {len} must be even"
        )));
    }
    let n = (len / 2) as i64;
    let values = (-n..n)
        .map(|k| {
            let sum: Complex64 = samples
                .iter()
                .enumerate()
                .map(|(idx, &g)| {
                    let j = idx as i64 - n;
                    // exp(-i pi jk/n) with the integer product reduced mod 2n
                    let phase = (j * k).rem_euclid(2 * n) as f64 * PI / n as f64;
                    Complex64::from_polar(g, -phase)
                })
                .sum();
            sum / len as f64
        })
        .collect();
    TrigCoefficients::new(values)
}

/// `exp(i pi k x)` with `k x` reduced modulo 2 before scaling by `pi`.
fn mode(k: i64, x: f64) -> Complex64 {
    let t = (k as f64 * x).rem_euclid(2.0);
    Complex64::from_polar(1.0, PI * t)
}

/// Value of the series at `x` in `[-1, 1]`.
pub fn eval_series(coeffs: &TrigCoefficients, x: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(FcError::DomainViolation { x, lo: -1.0, hi: 1.0 });
    }
    let n = coeffs.n() as i64;
    let mut acc = coeffs.get(-n).re * mode(n, x).re;
    for k in (1 - n)..n {
        acc += (coeffs.get(k) * mode(k, x)).re;
    }
    Ok(acc)
}

/// Values of the series at `x_j = -1 + j/m`, `j = 0..2m`, by zero-padding the spectrum.
pub fn resample(coeffs: &TrigCoefficients, m: usize) -> Result<Vec<f64>> {
    let n = coeffs.n();
    if m < n {
        return Err(FcError::Undersampling { target: m, n });
    }
    let len = 2 * m;
    if !len.is_power_of_two() {
        return (0..len)
            .map(|j| eval_series(coeffs, -1.0 + j as f64 / m as f64))
            .collect();
    }
    let mut spectrum = vec![Complex64::new(0.0, 0.0); len];
    for (k, c) in coeffs.iter() {
        if k == -(n as i64) {
            // Nyquist: split evenly between +n and -n
            spectrum[n] += c * 0.5;
            spectrum[len - n] += c * 0.5;
        } else {
            spectrum[k.rem_euclid(len as i64) as usize] += c;
        }
    }
    // x_j = -1 + j/m turns exp(i pi k x_j) into (-1)^k exp(2 pi i kj/len)
    for (slot, v) in spectrum.iter_mut().enumerate() {
        *v *= sign_alternate(slot);
    }
    Radix2Fft::new(len).process(&mut spectrum, true);
    Ok(spectrum.into_iter().map(|v| v.re).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(len: usize, seed: u64) -> Vec<f64> {
        let mut s = seed ^ 0x9E37_79B9_7F4A_7C15;
        (0..len)
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn constant_input() {
        let c = dft_forward(&[1.0; 16]).unwrap();
        for (k, v) in c.iter() {
            let expected = if k == 0 { 1.0 } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
        for &x in &[-1.0, -0.3, 0.0, 0.77, 1.0] {
            assert!((eval_series(&c, x).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn single_cosine_mode() {
        let n = 8;
        let g: Vec<f64> = (-(n as i64)..n as i64)
            .map(|j| (PI * j as f64 / n as f64).cos())
            .collect();
        let c = dft_forward(&g).unwrap();
        for (k, v) in c.iter() {
            let expected = if k.abs() == 1 { 0.5 } else { 0.0 };
            assert!((v - Complex64::new(expected, 0.0)).norm() < 1e-13, "k={k}");
        }
        let y = eval_series(&c, 0.25).unwrap();
        assert!((y - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-13);
        let dense = resample(&c, 4 * n).unwrap();
        for (j, v) in dense.iter().enumerate() {
            let x = -1.0 + j as f64 / (4 * n) as f64;
            assert!((v - (PI * x).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn fft_matches_naive() {
        for len in [2usize, 8, 64, 256, 1024] {
            let g = pseudo_random(len, len as u64);
            let fast = dft_forward(&g).unwrap();
            let slow = naive_dft_forward(&g).unwrap();
            let scale = fast.max_abs().max(1e-300);
            for (a, b) in fast.values().iter().zip(slow.values()) {
                assert!((a - b).norm() <= 1e-12 * scale, "len={len}");
            }
        }
    }

    #[test]
    fn non_power_of_two_falls_back() {
        let g = pseudo_random(12, 3);
        assert_eq!(dft_forward(&g).unwrap(), naive_dft_forward(&g).unwrap());
    }

    #[test]
    fn interpolates_nodes() {
        let n = 32;
        let g = pseudo_random(2 * n, 11);
        let c = dft_forward(&g).unwrap();
        for (idx, &v) in g.iter().enumerate() {
            let x = -1.0 + idx as f64 / n as f64;
            assert!((eval_series(&c, x).unwrap() - v).abs() < 1e-12);
        }
        // M = n returns the samples themselves
        let back = resample(&c, n).unwrap();
        for (a, b) in back.iter().zip(&g) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_matches_direct_evaluation() {
        let n = 64;
        let c = dft_forward(&pseudo_random(2 * n, 5)).unwrap();
        let dense = resample(&c, 256).unwrap();
        for (j, v) in dense.iter().enumerate() {
            let x = -1.0 + j as f64 / 256.0;
            assert!((v - eval_series(&c, x).unwrap()).abs() < 1e-12);
        }
        assert!(matches!(resample(&c, 32), Err(FcError::Undersampling { .. })));
    }

    #[test]
    fn errors() {
        assert_eq!(dft_forward(&[]), Err(FcError::EmptyInput));
        assert!(dft_forward(&[1.0, 2.0, 3.0]).is_err());
        let c = dft_forward(&[1.0, 2.0]).unwrap();
        assert!(eval_series(&c, 1.5).is_err());
    }
}
