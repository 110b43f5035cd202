//! Test-function catalog, relative error metric, convergence studies and table output.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FcError, Result};
use crate::hermite::BoundaryDataMatrix;
use crate::pipeline::FcApproximant;

/// Default size `N` of the dense evaluation grid `z_j = j/N`.
pub const DEFAULT_DENSE_GRID: usize = 1 << 13;

/// Errors below this are treated as round-off and excluded from order checks.
pub const NOISE_FLOOR: f64 = 5e-14;

/// Highest derivative order provided for the transcendental families.
pub const MAX_DERIVATIVE_ORDER: usize = 10;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Identity,
    Constant(f64),
    /// `sin(w x)`
    Sine(f64),
    /// `exp(-2 cos(k x))`
    ExpCos(f64),
    /// `((x - c)^2 + eps^2)^{-1}`
    Rational { center: f64, eps: f64 },
    /// `|x - c| (x - c)^{d - 1}`
    Kink { center: f64, degree: i32 },
}

/// A function on `[0, 1]` with closed-form values and, where available, derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    name: String,
    kind: Kind,
    smoothness: String,
}

impl TestFunction {
    fn new(name: &str, kind: Kind, smoothness: &str) -> Self {
        Self {
            name: name.to_string(),
            kind,
            smoothness: smoothness.to_string(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn smoothness(&self) -> &str {
        &self.smoothness
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.kind {
            Kind::Identity => x,
            Kind::Constant(c) => c,
            Kind::Sine(w) => (w * x).sin(),
            Kind::ExpCos(k) => (-2.0 * (k * x).cos()).exp(),
            Kind::Rational { center, eps } => {
                let d = x - center;
                1.0 / (d * d + eps * eps)
            }
            Kind::Kink { center, degree } => {
                let d = x - center;
                d.abs() * d.powi(degree - 1)
            }
        }
    }

    /// `f^(m)(x)`, or `None` where the derivative does not exist or is not provided.
    pub fn derivative(&self, m: usize, x: f64) -> Option<f64> {
        if m == 0 {
            return Some(self.value(x));
        }
        match self.kind {
            Kind::Identity => Some(if m == 1 { 1.0 } else { 0.0 }),
            Kind::Constant(_) => Some(0.0),
            Kind::Kink { center, degree } => {
                let d = x - center;
                if m as i32 > degree {
                    return if d == 0.0 { None } else { Some(0.0) };
                }
                if d == 0.0 && m as i32 == degree {
                    return None;
                }
                let falling = ((degree - m as i32 + 1)..=degree).fold(1.0, |acc, k| acc * k as f64);
                Some(d.signum() * falling * d.powi(degree - m as i32))
            }
            _ if m > MAX_DERIVATIVE_ORDER => None,
            Kind::Sine(w) => Some(w.powi(m as i32) * shifted_sin(w * x, m)),
            Kind::ExpCos(k) => {
                // Taylor jet of -2 cos(k (x + t)) in t, then exp
                let inner: Vec<f64> = (0..=m)
                    .map(|i| -2.0 * k.powi(i as i32) * shifted_cos(k * x, i) / factorial(i))
                    .collect();
                Some(jet_exp(&inner)[m] * factorial(m))
            }
            Kind::Rational { center, eps } => {
                let d = x - center;
                let mut inner = vec![0.0; m + 1];
                inner[0] = d * d + eps * eps;
                inner[1] = 2.0 * d;
                if m >= 2 {
                    inner[2] = 1.0;
                }
                Some(jet_recip(&inner)[m] * factorial(m))
            }
        }
    }

    /// Samples `f(j/n)`, `j = 0..=n`.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        (0..=n).map(|j| self.value(j as f64 / n as f64)).collect()
    }
}

fn factorial(m: usize) -> f64 {
    (1..=m).fold(1.0, |acc, k| acc * k as f64)
}

/// `sin(theta + m pi/2)` without rounding the quarter-turn shift.
fn shifted_sin(theta: f64, m: usize) -> f64 {
    match m % 4 {
        0 => theta.sin(),
        1 => theta.cos(),
        2 => -theta.sin(),
        _ => -theta.cos(),
    }
}

fn shifted_cos(theta: f64, m: usize) -> f64 {
    shifted_sin(theta, m + 1)
}

/// Taylor coefficients of `exp(a(t))` from those of `a(t)`.
fn jet_exp(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    b[0] = a[0].exp();
    for i in 1..a.len() {
        let s: f64 = (1..=i).map(|j| j as f64 * a[j] * b[i - j]).sum();
        b[i] = s / i as f64;
    }
    b
}

/// Taylor coefficients of `1 / a(t)`.
fn jet_recip(a: &[f64]) -> Vec<f64> {
    let mut b = vec![0.0; a.len()];
    b[0] = 1.0 / a[0];
    for i in 1..a.len() {
        let s: f64 = (1..=i).map(|j| a[j] * b[i - j]).sum();
        b[i] = -s / a[0];
    }
    b
}

/// The built-in test functions.
pub fn builtin_catalog() -> Vec<TestFunction> {
    vec![
        TestFunction::new("x", Kind::Identity, "polynomial"),
        TestFunction::new("constant", Kind::Constant(1.0), "polynomial"),
        TestFunction::new("sin20", Kind::Sine(20.0), "analytic"),
        TestFunction::new("expcos50", Kind::ExpCos(50.0), "analytic"),
        TestFunction::new("expcos100", Kind::ExpCos(100.0), "analytic"),
        TestFunction::new("expcos200", Kind::ExpCos(200.0), "analytic"),
        TestFunction::new(
            "kink3",
            Kind::Kink { center: 1.0 / 3.0, degree: 3 },
            "D^{2,1}([0,1])",
        ),
        TestFunction::new(
            "abs_half",
            Kind::Kink { center: 0.5, degree: 1 },
            "D^{0,1}([0,1])",
        ),
        TestFunction::new(
            "kink_half",
            Kind::Kink { center: 0.5, degree: 3 },
            "D^{2,1}([0,1])",
        ),
        TestFunction::new(
            "feps1",
            Kind::Rational { center: 1.0 / 3.0, eps: 1.0 },
            "analytic, poles at 1/3 ± i",
        ),
        TestFunction::new(
            "feps0.1",
            Kind::Rational { center: 1.0 / 3.0, eps: 0.1 },
            "analytic, poles at 1/3 ± 0.1i",
        ),
        TestFunction::new(
            "feps0.01",
            Kind::Rational { center: 1.0 / 3.0, eps: 0.01 },
            "analytic, poles at 1/3 ± 0.01i",
        ),
    ]
}

/// Finds a catalog entry; `sin<w>`, `expcos<k>` and `feps<eps>` accept any parameter.
pub fn lookup(name: &str) -> Result<TestFunction> {
    if let Some(f) = builtin_catalog().into_iter().find(|f| f.name == name) {
        return Ok(f);
    }
    let parse = |prefix: &str| -> Option<f64> {
        name.strip_prefix(prefix)
            .and_then(|rest| rest.parse::<f64>().ok())
            .filter(|v| v.is_finite())
    };
    if let Some(k) = parse("expcos") {
        return Ok(TestFunction::new(name, Kind::ExpCos(k), "analytic"));
    }
    if let Some(eps) = parse("feps").filter(|e| *e > 0.0) {
        return Ok(TestFunction::new(
            name,
            Kind::Rational { center: 1.0 / 3.0, eps },
            "analytic",
        ));
    }
    if let Some(w) = parse("sin") {
        return Ok(TestFunction::new(name, Kind::Sine(w), "analytic"));
    }
    Err(FcError::UnknownFunction(name.to_string()))
}

/// Boundary matrix with entries `f^(m)(0)`, `f^(m)(1)` for `m = 0..=r`.
pub fn exact_boundary_matrix(f: &TestFunction, r: usize) -> Result<BoundaryDataMatrix> {
    let column = |x: f64| -> Result<Vec<f64>> {
        (0..=r)
            .map(|m| {
                f.derivative(m, x).ok_or_else(|| FcError::DerivativeUnavailable {
                    name: f.name.clone(),
                    m,
                })
            })
            .collect()
    };
    BoundaryDataMatrix::new(column(0.0)?, column(1.0)?)
}

/// `max_j |T(z_j) - f(z_j)| / max_j |f(z_j)|` over `z_j = j/N`, `j = 0..=N`.
pub fn relative_error(approx: &FcApproximant, f: &TestFunction, grid: usize) -> Result<f64> {
    let values = approx.evaluate_dense(grid)?;
    let mut err = 0.0_f64;
    let mut scale = 0.0_f64;
    for (j, v) in values.iter().enumerate() {
        let exact = f.value(j as f64 / grid as f64);
        err = err.max((v - exact).abs());
        scale = scale.max(exact.abs());
    }
    Ok(if scale > 0.0 { err / scale } else { err })
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    #[serde(rename = "e_n")]
    pub error: f64,
    /// Previous error divided by this one.
    pub ratio: Option<f64>,
    /// `log2(ratio)`.
    pub order: Option<f64>,
    #[serde(skip)]
    pub below_noise_floor: bool,
}

/// Builds table rows from errors at successive grid sizes.
pub fn records_from_errors(ns: &[usize], errors: &[f64]) -> Vec<ConvergenceRecord> {
    let mut out: Vec<ConvergenceRecord> = Vec::with_capacity(ns.len());
    for (i, (&n, &error)) in ns.iter().zip(errors).enumerate() {
        let ratio = (i > 0).then(|| errors[i - 1] / error);
        out.push(ConvergenceRecord {
            n,
            error,
            ratio,
            order: ratio.map(f64::log2),
            below_noise_floor: error < NOISE_FLOOR,
        });
    }
    out
}

fn check_increasing(ns: &[usize]) -> Result<()> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FcError::InvalidParameter(
            "grid sizes must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Runs `build` for every `n` (in parallel) and tabulates the relative errors.
pub fn convergence_study_with<B>(
    f: &TestFunction,
    ns: &[usize],
    grid: usize,
    build: B,
) -> Result<Vec<ConvergenceRecord>>
where
    B: Fn(&[f64]) -> Result<FcApproximant> + Sync,
{
    check_increasing(ns)?;
    let errors: Vec<f64> = ns
        .par_iter()
        .map(|&n| {
            let approx = build(&f.sample(n))?;
            relative_error(&approx, f, grid)
        })
        .collect::<Result<_>>()?;
    Ok(records_from_errors(ns, &errors))
}

/// Convergence of the finite-difference based approximant of order `(r, p)`.
pub fn convergence_study(
    f: &TestFunction,
    r: usize,
    p: usize,
    ns: &[usize],
    grid: usize,
) -> Result<Vec<ConvergenceRecord>> {
    let stencils = crate::finite_diff::StencilTable::new(r, p)?;
    convergence_study_with(f, ns, grid, |samples| {
        FcApproximant::with_stencils(samples, &stencils)
    })
}

/// Mean order over the last `rows` records, skipping rows at the noise floor.
pub fn empirical_order(records: &[ConvergenceRecord], rows: usize) -> Option<f64> {
    let start = records.len().saturating_sub(rows);
    let orders: Vec<f64> = records[start..]
        .iter()
        .filter(|r| !r.below_noise_floor)
        .filter_map(|r| r.order)
        .collect();
    (!orders.is_empty()).then(|| orders.iter().sum::<f64>() / orders.len() as f64)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let len = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / len;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / len;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = FcError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(FcError::UnknownFormat(s.to_string())),
        }
    }
}

/// Renders convergence records with columns `n, e_n, ratio, order`.
pub fn emit_table(records: &[ConvergenceRecord], format: TableFormat) -> String {
    let opt = |v: Option<f64>, f: &dyn Fn(f64) -> String| v.map(f).unwrap_or_default();
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            out.push_str("n,e_n,ratio,order\n");
            for r in records {
                let _ = writeln!(
                    out,
                    "{},{:e},{},{}",
                    r.n,
                    r.error,
                    opt(r.ratio, &|v| format!("{v:e}")),
                    opt(r.order, &|v| format!("{v:e}"))
                );
            }
        }
        TableFormat::Json => {
            out = serde_json::to_string_pretty(records).expect("records serialize");
            out.push('\n');
        }
        TableFormat::Markdown => {
            out.push_str("| n | e_n | e_prev/e_n | order |\n|---|---|---|---|\n");
            for r in records {
                let _ = writeln!(
                    out,
                    "| {} | {:.2e} | {} | {} |",
                    r.n,
                    r.error,
                    opt(r.ratio, &|v| format!("{v:.2}")),
                    opt(r.order, &|v| format!("{v:.2}"))
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central finite differences with Richardson-free small step, as a loose oracle.
    fn numeric_derivative(f: &TestFunction, m: usize, x: f64) -> f64 {
        let h = 1e-3;
        match m {
            1 => (f.value(x + h) - f.value(x - h)) / (2.0 * h),
            2 => (f.value(x + h) - 2.0 * f.value(x) + f.value(x - h)) / (h * h),
            _ => unreachable!(),
        }
    }

    #[test]
    fn catalog_lookup() {
        for f in builtin_catalog() {
            assert_eq!(lookup(f.name()).unwrap(), f);
            for &x in &[0.0, 0.2, 0.9, 1.0] {
                assert_eq!(f.derivative(0, x), Some(f.value(x)));
            }
        }
        assert!(matches!(lookup("nope"), Err(FcError::UnknownFunction(_))));
        assert!(lookup("expcos75").is_ok());
        assert!(lookup("feps0.5").is_ok());
        assert!(lookup("feps-1").is_err());
    }

    #[test]
    fn sine_derivatives() {
        let f = lookup("sin20").unwrap();
        assert_eq!(f.derivative(1, 0.0), Some(20.0));
        assert_eq!(f.derivative(2, 0.0), Some(-0.0));
        assert_eq!(f.derivative(3, 0.0), Some(-8000.0));
        let b = exact_boundary_matrix(&f, 2).unwrap();
        assert_eq!(b.row(0), &[0.0, 20.0, -0.0]);
        let s = 20f64.sin();
        let c = 20f64.cos();
        assert_eq!(b.row(1), &[s, 20.0 * c, -400.0 * s]);
    }

    #[test]
    fn expcos_derivatives() {
        let f = lookup("expcos50").unwrap();
        for &x in &[0.0, 0.013, 0.4, 1.0] {
            let d1 = f.derivative(1, x).unwrap();
            let closed = 100.0 * (50.0 * x).sin() * (-2.0 * (50.0 * x).cos()).exp();
            assert!((d1 - closed).abs() <= 1e-12 * closed.abs().max(1.0));
            // second derivative against the product rule
            let g = (-2.0 * (50.0 * x).cos()).exp();
            let d2 = 5000.0 * (50.0 * x).cos() * g + 100.0 * (50.0 * x).sin() * d1;
            assert!((f.derivative(2, x).unwrap() - d2).abs() <= 1e-11 * d2.abs().max(1.0));
        }
        assert!(f.derivative(MAX_DERIVATIVE_ORDER + 1, 0.0).is_none());
    }

    #[test]
    fn rational_derivatives() {
        let f = lookup("feps0.1").unwrap();
        for &x in &[0.0, 0.5, 1.0] {
            let d = x - 1.0 / 3.0;
            let q = d * d + 0.01;
            let d1 = -2.0 * d / (q * q);
            let d2 = (6.0 * d * d - 0.02) / (q * q * q);
            assert!((f.derivative(1, x).unwrap() - d1).abs() <= 1e-12 * d1.abs().max(1.0));
            assert!((f.derivative(2, x).unwrap() - d2).abs() <= 1e-12 * d2.abs().max(1.0));
            assert!((f.derivative(2, x).unwrap() - numeric_derivative(&f, 2, x)).abs() < 1e-2 * d2.abs());
        }
    }

    #[test]
    fn kink_properties() {
        let f = lookup("kink3").unwrap();
        assert_eq!(f.value(1.0 / 3.0), 0.0);
        let c = 1.0 / 3.0;
        // C^2 across the kink, third derivative jumps from -6 to 6
        assert_eq!(f.derivative(2, c), Some(0.0));
        assert_eq!(f.derivative(3, c - 0.1), Some(-6.0));
        assert_eq!(f.derivative(3, c + 0.1), Some(6.0));
        assert_eq!(f.derivative(3, c), None);
        assert_eq!(f.derivative(4, 0.9), Some(0.0));
        assert!((f.derivative(1, 0.0).unwrap() - (-3.0 * c * c)).abs() < 1e-15);
    }

    #[test]
    fn exact_matrices() {
        let x = exact_boundary_matrix(&lookup("x").unwrap(), 1).unwrap();
        assert_eq!(x.row(0), &[0.0, 1.0]);
        assert_eq!(x.row(1), &[1.0, 1.0]);
        let c = exact_boundary_matrix(&lookup("constant").unwrap(), 3).unwrap();
        assert_eq!(c.row(0), &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            exact_boundary_matrix(&lookup("sin20").unwrap(), 11),
            Err(FcError::DerivativeUnavailable { m: 11, .. })
        ));
    }

    #[test]
    fn relative_error_of_constant() {
        let f = lookup("constant").unwrap();
        let approx = FcApproximant::new(&f.sample(64), 4, 4).unwrap();
        assert!(relative_error(&approx, &f, 1024).unwrap() <= 1e-13);
    }

    #[test]
    fn records_and_orders() {
        let recs = records_from_errors(&[64, 128, 256], &[1.6e-3, 1e-4, 6.25e-6]);
        assert_eq!(recs[0].ratio, None);
        assert!((recs[1].ratio.unwrap() - 16.0).abs() < 1e-12);
        assert!((recs[2].order.unwrap() - 4.0).abs() < 1e-12);
        assert!((empirical_order(&recs, 3).unwrap() - 4.0).abs() < 1e-12);
        let floor = records_from_errors(&[64, 128], &[1e-13, 1e-14]);
        assert!(floor[1].below_noise_floor);
        assert_eq!(empirical_order(&floor, 1), None);
    }

    #[test]
    fn study_rejects_unsorted_grid() {
        let f = lookup("sin20").unwrap();
        assert!(convergence_study(&f, 2, 2, &[128, 64], 256).is_err());
    }

    #[test]
    fn table_formats() {
        assert_eq!(emit_table(&[], TableFormat::Csv), "n,e_n,ratio,order\n");
        assert_eq!(emit_table(&[], TableFormat::Json), "[]\n");
        let md = emit_table(&[], TableFormat::Markdown);
        assert_eq!(md.lines().count(), 2);

        let one = records_from_errors(&[64], &[1.17e-3]);
        assert_eq!(emit_table(&one, TableFormat::Csv), "n,e_n,ratio,order\n64,1.17e-3,,\n");
        assert_eq!(
            emit_table(&one, TableFormat::Markdown).lines().nth(2).unwrap(),
            "| 64 | 1.17e-3 |  |  |"
        );
        let json: serde_json::Value =
            serde_json::from_str(&emit_table(&one, TableFormat::Json)).unwrap();
        assert_eq!(json[0]["n"], 64);
        assert_eq!(json[0]["e_n"], 1.17e-3);
        assert!(json[0]["ratio"].is_null());
        assert!("xml".parse::<TableFormat>().is_err());
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (1..10).map(|k| (k as f64, 3.0 * (k as f64).powf(-2.5))).collect();
        assert!((loglog_slope(&pts).unwrap() + 2.5).abs() < 1e-12);
    }
}
