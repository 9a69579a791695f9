//! Crate-wide error types.

use thiserror::Error;

/// Parse failure with a 1-based column position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at column {column}: {message}")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

/// Evaluation failure of a drift expression at a point.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("point singularity at x = {x}: {what}")]
    Singular { x: f64, what: &'static str },
    #[error("non-finite input x")]
    NonFiniteInput,
}

/// Drift construction / classification failure.
#[derive(Debug, Clone, Error)]
pub enum DriftError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("drift parameter out of range: {0}")]
    BadParam(String),
    #[error("drift appears unbounded on its window (|a| > {cap} at x = {at})")]
    Unbounded { cap: f64, at: f64 },
    #[error("drift evaluates to a non-finite value at x = {at}")]
    NonFinite { at: f64 },
    #[error("empty or inverted window [{lo}, {hi}]")]
    BadWindow { lo: f64, hi: f64 },
}

/// Quadrature failure.
#[derive(Debug, Clone, Error)]
pub enum QuadError {
    #[error("refinement depth cap reached without meeting tolerance (best error {best_err})")]
    MaxDepth { best_err: f64 },
    #[error("integral diverges")]
    Divergent,
    #[error("drift has the wrong sign on the {side} side at x = {at}")]
    SignViolation { side: &'static str, at: f64 },
    #[error("value {y} outside the range [{lo}, {hi}] of the monotone function")]
    OutOfRange { y: f64, lo: f64, hi: f64 },
}

/// Analytic-pipeline failure.
#[derive(Debug, Clone, Error)]
pub enum LimitError {
    #[error("operation requires a repulsive sign pattern near 0, found {found}")]
    RegimeMismatch { found: String },
    #[error("degenerate interval: x1 = x2 = {x}")]
    DegenerateInterval { x: f64 },
    #[error("point {x} outside [{lo}, {hi}]")]
    PointOutsideInterval { x: f64, lo: f64, hi: f64 },
    #[error("scale value overflow: log magnitude {log} exceeds f64 range")]
    Overflow { log: f64 },
    #[error("extrapolation ladder did not stabilize; trace has {len} entries")]
    NonConvergent { len: usize },
    #[error("{0}")]
    Quad(#[from] QuadError),
    #[error("{0}")]
    Eval(#[from] EvalError),
}

/// Monte Carlo configuration / resource failure.
#[derive(Debug, Clone, Error)]
pub enum McError {
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("full-path recording would need {need} samples, cap is {cap}")]
    ResourceCap { need: u64, cap: u64 },
    #[error("comparison precondition violated: a1 > a2 at x = {at} (gap {gap})")]
    NotOrdered { at: f64, gap: f64 },
}

/// Top-level error for CLI and report plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Drift(#[from] DriftError),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Eval(#[from] EvalError),
    #[error("{0}")]
    Quad(#[from] QuadError),
    #[error("{0}")]
    Limit(#[from] LimitError),
    #[error("{0}")]
    Mc(#[from] McError),
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad config: {0}")]
    Config(String),
}
