//! Fourier continuation of non-periodic functions sampled on equispaced grids.
//!
//! Samples `f_0..f_n` of a function on `[0, 1]` are extended to `[-1, 0)` by a
//! two-point Hermite polynomial whose endpoint data come from one-sided finite
//! differences. The extended sequence is periodic on `[-1, 1)`, so its
//! discrete Fourier series interpolates the data without Gibbs oscillations
//! and converges at order `min(p, r) + 1`.
//!
//! ```
//! use fcont::pipeline::fc_approximate;
//!
//! let n = 256;
//! let samples: Vec<f64> = (0..=n).map(|j| (20.0 * j as f64 / n as f64).sin()).collect();
//! let approx = fc_approximate(&samples, 3, 3).unwrap();
//! let y = approx.evaluate(0.3).unwrap();
//! assert!((y - (20.0f64 * 0.3).sin()).abs() < 1e-5);
//! ```

pub mod acceptance;
pub mod analysis;
pub mod cli;
pub mod error;
pub mod finite_diff;
pub mod hermite;
pub mod pipeline;
pub mod spectral;

pub use error::{FcError, Result};
pub use finite_diff::{make_stencil, Side, Stencil, StencilSpec, StencilTable};
pub use hermite::{
    BoundaryDataMatrix, ContinuationPolynomial, ContinuationSpec, HermiteBasisSet, R_MAX,
};
pub use pipeline::{FcApproximant, PiecewisePolyContinuation};
pub use spectral::TrigCoefficients;
