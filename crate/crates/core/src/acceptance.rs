//! Acceptance checks: reference convergence tables, operator properties and
//! oracle equivalences. Shared by the `selftest` command and the test suite.

use std::fmt;

use num_complex::Complex64;

use crate::analysis::{
    self, convergence_study_with, empirical_order, exact_boundary_matrix, loglog_slope, lookup,
    ConvergenceRecord, DEFAULT_DENSE_GRID,
};
use crate::error::Result;
use crate::finite_diff::{Side, StencilTable};
use crate::hermite::{
    eval_continuation, operator_norm_bound, verify_binomial_identity, BoundaryDataMatrix,
    HermiteBasisSet,
};
use crate::pipeline::{continuous_coefficient_ppoly, FcApproximant, PiecewisePolyContinuation};
use crate::spectral::{self, dft_forward, naive_dft_forward, resample};

/// Grid sizes `2^6..=2^12` shared by the reference tables.
const TABLE_EXPONENTS: std::ops::RangeInclusive<u32> = 6..=12;

// Reference relative errors e_n for n = 2^6 .. 2^12.
const SIN20_P3: [(usize, [f64; 7]); 3] = [
    (1, [1.17e-3, 3.20e-4, 8.24e-5, 2.07e-5, 5.20e-6, 1.22e-6, 2.92e-7]),
    (2, [2.39e-4, 1.90e-5, 1.68e-6, 1.73e-7, 2.15e-8, 2.69e-9, 3.36e-10]),
    (3, [1.93e-4, 1.24e-5, 7.85e-7, 4.93e-8, 3.09e-9, 1.86e-10, 1.16e-11]),
];
const SIN20_P4: [(usize, [f64; 7]); 3] = [
    (2, [1.42e-4, 1.28e-5, 1.44e-6, 1.75e-7, 2.16e-8, 2.69e-9, 3.37e-10]),
    (3, [6.94e-5, 2.53e-6, 1.02e-7, 4.64e-9, 2.32e-10, 1.27e-11, 7.46e-13]),
    (4, [4.03e-5, 1.42e-6, 4.59e-8, 1.44e-9, 4.51e-11, 1.32e-12, 7.67e-14]),
];
// kink3 with r = 2 and r = 3, indexed by p = 1, 2, 3
const KINK3_R2: [(usize, [f64; 7]); 3] = [
    (1, [1.54e-4, 3.88e-5, 9.74e-6, 2.43e-6, 6.08e-7, 1.46e-7, 3.65e-8]),
    (2, [3.20e-6, 4.02e-7, 5.05e-8, 6.32e-9, 7.81e-10, 9.77e-11, 1.22e-11]),
    (3, [3.29e-6, 4.18e-7, 5.26e-8, 6.59e-9, 8.17e-10, 1.02e-10, 1.28e-11]),
];
const KINK3_R3: [(usize, [f64; 7]); 3] = [
    (1, [1.56e-4, 3.91e-5, 9.79e-6, 2.44e-6, 6.09e-7, 1.46e-7, 3.66e-8]),
    (2, [2.60e-6, 3.15e-7, 3.88e-8, 4.79e-9, 5.97e-10, 7.15e-11, 8.93e-12]),
    (3, [8.13e-7, 1.01e-7, 1.27e-8, 1.58e-9, 1.98e-10, 2.27e-11, 2.84e-12]),
];

/// Options for a run of the acceptance checks.
#[derive(Debug, Clone, Copy, Default)]
pub struct AcceptanceConfig {
    /// Shift added to every finite-difference weight (negative control).
    pub stencil_perturbation: Option<f64>,
}

impl AcceptanceConfig {
    fn stencils(&self, r: usize, p: usize) -> Result<StencilTable> {
        let table = StencilTable::new(r, p)?;
        Ok(match self.stencil_perturbation {
            Some(delta) => table.perturbed(delta),
            None => table,
        })
    }

    fn study(&self, name: &str, r: usize, p: usize, ns: &[usize]) -> Result<Vec<ConvergenceRecord>> {
        let f = lookup(name)?;
        let stencils = self.stencils(r, p)?;
        convergence_study_with(&f, ns, DEFAULT_DENSE_GRID, |samples| {
            FcApproximant::with_stencils(samples, &stencils)
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}. {}", self.id, self.title)?;
        for d in &self.details {
            write!(f, "\n       {d}")?;
        }
        Ok(())
    }
}

/// Collects individual checks for one criterion.
struct Checks {
    passed: bool,
    details: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, msg: String) {
        self.passed &= ok;
        self.details
            .push(format!("{} {msg}", if ok { "ok  " } else { "FAIL" }));
    }

    fn finish(mut self, id: u32, title: &'static str, result: Result<()>) -> CriterionOutcome {
        if let Err(e) = result {
            self.check(false, format!("error: {e}"));
        }
        CriterionOutcome {
            id,
            title,
            passed: self.passed,
            details: self.details,
        }
    }
}

fn table_grid() -> Vec<usize> {
    TABLE_EXPONENTS.map(|e| 1usize << e).collect()
}

fn within_factor(value: f64, reference: f64, factor: f64) -> bool {
    value <= reference * factor && value >= reference / factor
}

/// Compares every row against the reference within `factor` and returns a summary line.
fn compare_rows(records: &[ConvergenceRecord], reference: &[f64], factor: f64) -> (bool, String) {
    let mut ok = true;
    let mut worst: f64 = 1.0;
    for (rec, &r) in records.iter().zip(reference) {
        ok &= within_factor(rec.error, r, factor);
        let dev = (rec.error / r).max(r / rec.error);
        worst = worst.max(dev);
    }
    let last = records.last().map(|r| r.error).unwrap_or(f64::NAN);
    let last_ref = reference.last().copied().unwrap_or(f64::NAN);
    (
        ok,
        format!("worst deviation factor {worst:.2} (limit {factor}), last e_n {last:.2e} vs {last_ref:.2e}"),
    )
}

fn order_line(label: &str, order: Option<f64>, target: f64, tol: f64) -> (bool, String) {
    match order {
        Some(o) => (
            (o - target).abs() <= tol,
            format!("{label}: order {o:.2}, expected {target} ± {tol}"),
        ),
        None => (false, format!("{label}: no order available")),
    }
}

#[allow(clippy::too_many_arguments)]
fn reference_table(
    config: &AcceptanceConfig,
    id: u32,
    title: &'static str,
    function: &str,
    rows: &[(usize, [f64; 7])],
    fixed: usize,
    vary_r: bool,
    expected_order: impl Fn(usize) -> f64,
) -> CriterionOutcome {
    let mut checks = Checks::new();
    let ns = table_grid();
    let result = (|| -> Result<()> {
        for (param, reference) in rows {
            let (r, p) = if vary_r { (*param, fixed) } else { (fixed, *param) };
            let records = config.study(function, r, p, &ns)?;
            let label = format!("r={r} p={p}");
            let (ok, msg) = compare_rows(&records, reference, 2.0);
            checks.check(ok, format!("{label}: {msg}"));
            let (ok, msg) = order_line(&label, empirical_order(&records, 3), expected_order(*param), 0.3);
            checks.check(ok, msg);
        }
        Ok(())
    })();
    checks.finish(id, title, result)
}

/// sin(20x), p = 3, r = 1, 2, 3.
pub fn criterion_1(config: &AcceptanceConfig) -> CriterionOutcome {
    reference_table(
        config,
        1,
        "sin(20x), p = 3: errors within 2x of reference, order r + 1",
        "sin20",
        &SIN20_P3,
        3,
        true,
        |r| (r + 1) as f64,
    )
}

/// sin(20x), p = 4, r = 2, 3, 4.
pub fn criterion_2(config: &AcceptanceConfig) -> CriterionOutcome {
    reference_table(
        config,
        2,
        "sin(20x), p = 4: errors within 2x of reference, order r + 1 above the noise floor",
        "sin20",
        &SIN20_P4,
        4,
        true,
        |r| (r + 1) as f64,
    )
}

/// |x - 1/3|(x - 1/3)^2 with r = 2 and r = 3: the order saturates at 3.
pub fn criterion_3(config: &AcceptanceConfig) -> CriterionOutcome {
    let order = |p: usize| (p.min(2) + 1) as f64;
    let a = reference_table(config, 3, "", "kink3", &KINK3_R2, 2, false, order);
    let b = reference_table(config, 3, "", "kink3", &KINK3_R3, 3, false, order);
    CriterionOutcome {
        id: 3,
        title: "|x-1/3|(x-1/3)^2, r = 2, 3: order min(p, 2) + 1, errors within 2x",
        passed: a.passed && b.passed,
        details: a.details.into_iter().chain(b.details).collect(),
    }
}

/// exp(-2 cos kx), r = p = 4.
pub fn criterion_4(config: &AcceptanceConfig) -> CriterionOutcome {
    let mut checks = Checks::new();
    let result = (|| -> Result<()> {
        let records = config.study("expcos50", 4, 4, &table_grid())?;
        let last = records.last().expect("non-empty").error;
        checks.check(last <= 5e-12, format!("k=50: e_4096 = {last:.2e} <= 5e-12"));
        let order = empirical_order(&records, 2).unwrap_or(f64::NAN);
        checks.check(
            (4.6..=5.4).contains(&order),
            format!("k=50: mean order of the last two rows {order:.2} in [4.6, 5.4]"),
        );
        let plateau = config.study("expcos200", 4, 4, &[256])?[0].error;
        checks.check(plateau >= 1e-2, format!("k=200: e_256 = {plateau:.2e} >= 1e-2"));
        Ok(())
    })();
    checks.finish(4, "exp(-2 cos kx), r = p = 4: resolution and order", result)
}

/// ((x - 1/3)^2 + eps^2)^{-1}, r = p = 4.
pub fn criterion_5(config: &AcceptanceConfig) -> CriterionOutcome {
    let mut checks = Checks::new();
    let result = (|| -> Result<()> {
        let e1 = config.study("feps1", 4, 4, &[512])?[0].error;
        checks.check(e1 <= 2e-13, format!("eps=1: e_512 = {e1:.2e} <= 2e-13"));
        let rows = config.study("feps0.01", 4, 4, &[256, 1024])?;
        checks.check(
            rows[0].error >= 1e-4,
            format!("eps=0.01: e_256 = {:.2e} >= 1e-4", rows[0].error),
        );
        checks.check(
            rows[1].error <= 1e-12,
            format!("eps=0.01: e_1024 = {:.2e} <= 1e-12", rows[1].error),
        );
        Ok(())
    })();
    checks.finish(5, "rational f_eps, r = p = 4: superalgebraic collapse", result)
}

/// Deterministic uniform numbers in `[-1, 1)` (SplitMix64).
struct Uniform(u64);

impl Uniform {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    }

    fn matrix(&mut self, r: usize) -> BoundaryDataMatrix {
        let left = (0..=r).map(|_| self.next()).collect();
        let right = (0..=r).map(|_| self.next()).collect();
        BoundaryDataMatrix::new(left, right).expect("finite entries")
    }
}

/// Endpoint derivative conditions, binomial identity and norm bound.
pub fn criterion_6(_config: &AcceptanceConfig) -> CriterionOutcome {
    let mut checks = Checks::new();
    let result = (|| -> Result<()> {
        let mut rng = Uniform(6);
        let mut worst: f64 = 0.0;
        for r in 0..=10 {
            let basis = HermiteBasisSet::new(r)?;
            for _ in 0..100 {
                let data = rng.matrix(r);
                let poly = basis.assemble(&data)?;
                for m in 0..=r {
                    let d0 = poly.derivative(m, 0.0)? - data.entry(0, m);
                    let d1 = poly.derivative(m, -1.0)? - data.entry(1, m);
                    worst = worst.max(d0.abs()).max(d1.abs());
                }
            }
        }
        checks.check(
            worst <= 1e-9,
            format!("endpoint conditions, r <= 10, 100 matrices each: max error {worst:.2e} <= 1e-9"),
        );

        let mut identity_ok = true;
        for r in 0..=20 {
            for n in 1..=(r + 1) {
                identity_ok &= verify_binomial_identity(r, n)?;
            }
        }
        checks.check(identity_ok, "binomial identity exact for r <= 20, 1 <= n <= r+1".into());

        let mut violations = 0;
        let mut ratio: f64 = 0.0;
        let bases: Vec<HermiteBasisSet> = (0..=10).map(HermiteBasisSet::new).collect::<Result<_>>()?;
        for i in 0..1000 {
            let r = i % 11;
            let data = rng.matrix(r);
            let x = -(rng.next() + 1.0) / 2.0;
            let v = eval_continuation(&data, &bases[r], x)?;
            let bound = operator_norm_bound(r)? * data.max_norm();
            if v.abs() > bound {
                violations += 1;
            }
            ratio = ratio.max(v.abs() / bound);
        }
        checks.check(
            violations == 0,
            format!("norm bound: {violations} violations in 1000 samples (max |P(F)(x)| / bound = {ratio:.3})"),
        );
        Ok(())
    })();
    checks.finish(6, "Hermite continuation properties", result)
}

/// FFT vs direct DFT, resampling vs pointwise evaluation, stencil polynomial exactness.
pub fn criterion_7(config: &AcceptanceConfig) -> CriterionOutcome {
    let mut checks = Checks::new();
    let result = (|| -> Result<()> {
        let mut rng = Uniform(7);
        for len in [8usize, 64, 256, 1024] {
            let g: Vec<f64> = (0..len).map(|_| rng.next()).collect();
            let fast = dft_forward(&g)?;
            let slow = naive_dft_forward(&g)?;
            let scale = slow.max_abs();
            let dev = fast
                .values()
                .iter()
                .zip(slow.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
                / scale;
            checks.check(dev <= 1e-12, format!("FFT vs direct DFT, 2n = {len}: {dev:.2e} <= 1e-12"));
        }

        let g: Vec<f64> = (0..128).map(|_| rng.next()).collect();
        let coeffs = dft_forward(&g)?;
        let dense = resample(&coeffs, 256)?;
        let mut dev: f64 = 0.0;
        for (j, v) in dense.iter().enumerate() {
            let x = -1.0 + j as f64 / 256.0;
            dev = dev.max((v - spectral::eval_series(&coeffs, x)?).abs());
        }
        let scale = coeffs.max_abs().max(1.0);
        checks.check(
            dev <= 1e-12 * scale,
            format!("resample (n = 64, M = 256) vs pointwise: {dev:.2e} <= 1e-12"),
        );

        let mut worst: f64 = 0.0;
        for p in 1..=4 {
            let table = config.stencils(4, p)?;
            for m in 1..=4 {
                let degree = (m + p - 1) as i32;
                let n = 16;
                let samples: Vec<f64> = (0..=n)
                    .map(|j| (j as f64 / n as f64 - 0.4).powi(degree))
                    .collect();
                let falling = ((degree - m as i32 + 1)..=degree).fold(1.0, |a, k| a * k as f64);
                for (side, x) in [(Side::Forward, 0.0), (Side::Backward, 1.0)] {
                    let stencil = match side {
                        Side::Forward => table.forward(m),
                        Side::Backward => table.backward(m),
                    };
                    let exact = falling * (x - 0.4f64).powi(degree - m as i32);
                    let err = (stencil.apply(&samples)? - exact).abs() / exact.abs().max(1.0);
                    worst = worst.max(err);
                }
            }
        }
        checks.check(
            worst <= 1e-9,
            format!("stencils on degree m+p-1 polynomials, m, p <= 4: {worst:.2e} <= 1e-9"),
        );
        Ok(())
    })();
    checks.finish(7, "oracle equivalences", result)
}

/// Log-log slope of `|c_k(f_c)|` over `k = 16..=512` for the continuation of `f(x) = x`.
///
/// The leading term of `c_k` alternates between the two junction jumps, which
/// can cancel for every other `k`; the slope is fitted on the parity class
/// carrying the larger coefficients.
pub fn decay_slope(r: usize) -> Result<f64> {
    let fc = PiecewisePolyContinuation::from_polynomial(&[0.0, 1.0], r)?;
    let mut classes: [Vec<(f64, f64)>; 2] = [Vec::new(), Vec::new()];
    for k in 16..=512i64 {
        let c: Complex64 = continuous_coefficient_ppoly(&fc, k)?;
        classes[(k % 2) as usize].push((k as f64, c.norm()));
    }
    let mass = |pts: &[(f64, f64)]| pts.iter().map(|p| p.1).sum::<f64>();
    let dominant = if mass(&classes[0]) >= mass(&classes[1]) {
        &classes[0]
    } else {
        &classes[1]
    };
    Ok(loglog_slope(dominant).unwrap_or(f64::NAN))
}

pub fn criterion_8(_config: &AcceptanceConfig) -> CriterionOutcome {
    let mut checks = Checks::new();
    let result = (|| -> Result<()> {
        for r in 0..=2 {
            let slope = decay_slope(r)?;
            let target = -((r + 2) as f64);
            checks.check(
                (slope - target).abs() <= 0.4,
                format!("r={r}: slope {slope:.3}, expected {target} ± 0.4"),
            );
        }
        Ok(())
    })();
    checks.finish(8, "coefficient decay |c_k| ~ k^-(r+2) for f(x) = x", result)
}

/// Convergence of sin(20x), r = 4, with exact boundary data whose column `s + 1` is shifted by 1.
pub fn perturbed_boundary_study(s: usize) -> Result<Vec<ConvergenceRecord>> {
    let f = lookup("sin20")?;
    let mut boundary = exact_boundary_matrix(&f, 4)?;
    for j in 0..2 {
        boundary.set(j, s + 1, boundary.entry(j, s + 1) + 1.0);
    }
    let ns: Vec<usize> = (7..=12).map(|e| 1usize << e).collect();
    analysis::convergence_study_with(&f, &ns, DEFAULT_DENSE_GRID, |samples| {
        FcApproximant::with_boundary(samples, boundary.clone())
    })
}

pub fn criterion_9(_config: &AcceptanceConfig) -> CriterionOutcome {
    let mut checks = Checks::new();
    let result = (|| -> Result<()> {
        for s in 0..=2 {
            let records = perturbed_boundary_study(s)?;
            let (ok, msg) = order_line(
                &format!("s={s}"),
                empirical_order(&records, 3),
                (s + 1) as f64,
                0.4,
            );
            checks.check(ok, msg);
        }
        Ok(())
    })();
    checks.finish(9, "s-exact boundary data limits the order to s + 1", result)
}

/// Runs every criterion in order.
pub fn run_all(config: &AcceptanceConfig) -> Vec<CriterionOutcome> {
    let criteria: [fn(&AcceptanceConfig) -> CriterionOutcome; 9] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
    ];
    criteria.iter().map(|c| c(config)).collect()
}
