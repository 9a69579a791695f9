//! Zero-noise limits of one-dimensional ODEs with irregular drift.
//!
//! Given a drift `a(x)` (a parsed expression or a built-in family), this crate
//! computes the limit law of the stochastically perturbed equation
//! `dX = a(X) dt + eps dW` as `eps -> 0`: the extremal solutions of the
//! noiseless equation, the scale-function weight `p` splitting the limit
//! measure between them, exit probabilities and expected exit times, and a
//! reproducible parallel Euler-Maruyama engine to verify every analytic
//! quantity empirically.
//!
//! The main entry points are:
//! - [`drift::parse_drift`] / [`drift::Drift`] — drift construction,
//! - [`limit`] — the analytic pipeline (scale function, weights, exit times),
//! - [`solver::extremal_solution`] — the noiseless extremal solutions,
//! - [`mc::simulate_ensemble`] — the Monte Carlo engine,
//! - [`report`] — run configuration and CSV/JSON/SVG emitters,
//! - [`acceptance`] — the self-checking verification suite.

pub mod acceptance;
pub mod calculus;
pub mod drift;
pub mod error;
pub mod limit;
pub mod mc;
pub mod report;
pub mod solver;

pub use drift::{parse_drift, Drift};
pub use error::Error;
