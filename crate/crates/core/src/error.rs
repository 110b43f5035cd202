use thiserror::Error;

/// Errors raised by the continuation, stencil, spectral and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FcError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unsupported continuation order r = {r} (supported range 0..={max})")]
    UnsupportedOrder { r: usize, max: usize },
    #[error("argument x = {x} outside the domain [{lo}, {hi}]")]
    DomainViolation { x: f64, lo: f64, hi: f64 },
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("unsupported stencil: derivative order {m}, accuracy order {p}")]
    UnsupportedStencil { m: usize, p: usize },
    #[error("insufficient samples: have {have}, need at least {need}")]
    InsufficientSamples { have: usize, need: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("undersampling: target size {target} is below the coefficient half-length {n}")]
    Undersampling { target: usize, n: usize },
    #[error("unknown test function `{0}`")]
    UnknownFunction(String),
    #[error("derivative of order {m} unavailable for `{name}`")]
    DerivativeUnavailable { name: String, m: usize },
    #[error("unknown output format `{0}`")]
    UnknownFormat(String),
}

pub type Result<T> = std::result::Result<T, FcError>;
