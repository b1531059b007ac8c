use thiserror::Error;

/// Errors raised across the laboratory.
///
/// Certification outcomes that are "results" (an order function that fails to
/// certify, a symbol outside its class) are returned as report values, not as
/// errors. Errors are reserved for violated preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error(
        "point {re}{im:+}i lies outside the chart bound {bound}; switch to the antipodal chart"
    )]
    ChartOverflow { re: f64, im: f64, bound: f64 },

    #[error("pair is not polarizable: 1 + x*conj(y) = {re}{im:+}i lies on the branch cut")]
    NonPolarizable { re: f64, im: f64 },

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("derivative order {requested} exceeds the materialized profile cap {cap}")]
    DerivativeCap { requested: u32, cap: u32 },

    #[error("delta = {0} outside [0, 1/2)")]
    DeltaOutOfRange(f64),

    #[error("order-function seed takes negative value {value} at {re}{im:+}i")]
    NegativeSeed { value: f64, re: f64, im: f64 },

    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("quadrature did not reach relative accuracy {target:e} (worst monomial {worst_index}, rel. err {worst_error:e})")]
    QuadratureNonConvergence {
        worst_index: usize,
        worst_error: f64,
        target: f64,
    },

    #[error("angular node count {angular} cannot resolve dimension {dim}: monomial orthogonality aliased")]
    Aliasing { angular: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("level mismatch: N = {left} vs N = {right}")]
    LevelMismatch { left: usize, right: usize },

    #[error("symbol evaluated to a non-finite value at {re}{im:+}i")]
    NonFinite { re: f64, im: f64 },

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("pair outside the near-diagonal window: |x - y| = {distance} > {window}")]
    OutOfWindow { distance: f64, window: f64 },

    #[error("hypothesis not certified: {0}")]
    Hypothesis(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("error budget {budget:e} exceeds requested tolerance {tolerance:e}")]
    Budget { budget: f64, tolerance: f64 },

    #[error("rate fit needs at least 3 positive values, got {0}")]
    TooFewPoints(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
