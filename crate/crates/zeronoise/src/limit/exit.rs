//! Expected exit times: the double-integral route and the Green-kernel route.
//!
//! The primary operation evaluates the boundary-value formula
//! `u(x) = -D(x) + D(x2) S(x)/S(x2)` with
//! `D(y) = int_{x1}^y 2 Phi(w) int_{x1}^w dz/(eps^2 Phi(z)) dw`,
//! `S(y) = int_{x1}^y Phi`, `Phi(w) = exp(-2 (B(w)-B(x1))/eps^2)`,
//! by nested log-domain quadrature. The independent cross-check integrates
//! the Green function against the speed measure
//! `m(dy) = (2/eps^2) exp(2B(y)/eps^2) dy`.

use std::sync::Arc;

use crate::calculus::logint::{log_exp_integral, LogCum};
use crate::drift::Drift;
use crate::error::LimitError;
use crate::limit::scale::{Potential, ScaleEval};

/// Expectation of the exit time of (x1, x2) started at x, noise level eps,
/// via the boundary-value double-integral formula.
pub fn expected_exit_time(
    drift: &Drift,
    eps: f64,
    x: f64,
    x1: f64,
    x2: f64,
    tol: f64,
) -> Result<f64, LimitError> {
    if x1 == x2 {
        return Err(LimitError::DegenerateInterval { x: x1 });
    }
    if !(x1 <= x && x <= x2) {
        return Err(LimitError::PointOutsideInterval { x, lo: x1, hi: x2 });
    }
    if x == x1 || x == x2 {
        return Ok(0.0);
    }
    let e2 = eps * eps;
    let pot = Arc::new(
        Potential::build(drift, (-x1).max(0.0), x2.max(0.0)).map_err(LimitError::Quad)?,
    );
    let b_x1 = pot.b(x1);
    // lb = log Phi, anchored at x1 so Phi(x1) = 1.
    let lb = {
        let pot = Arc::clone(&pot);
        move |z: f64| -2.0 * (pot.b(z) - b_x1) / e2
    };
    let hints = drift.breakpoints(x1, x2, 2048);
    let rel = tol.max(1e-12);
    let c_phi = LogCum::build(&lb, x1, x2, &hints, rel);
    let neg_lb = |z: f64| -lb(z);
    let c_inv = LogCum::build(&neg_lb, x1, x2, &hints, rel);
    // log T(y) = log 2 + lb(y) + log I1(y), I1(y) = int_{x1}^y e^{-lb}/eps^2.
    let log_t = |y: f64| {
        let li1 = c_inv.log_between(&neg_lb, x1, y) - e2.ln();
        std::f64::consts::LN_2 + lb(y) + li1
    };
    let mut t_hints = hints.clone();
    t_hints.push(x);
    let c_t = LogCum::build(&log_t, x1, x2, &t_hints, rel);
    let log_d_x = c_t.log_between(&log_t, x1, x);
    let log_d_x2 = c_t.log_between(&log_t, x1, x2);
    let log_s_x = c_phi.log_between(&lb, x1, x);
    let log_s_x2 = c_phi.log_between(&lb, x1, x2);
    let a = log_d_x2 + log_s_x - log_s_x2;
    let b = log_d_x;
    if a > 709.0 {
        return Err(LimitError::Overflow { log: a });
    }
    // u = e^a - e^b, computed as e^b (e^{a-b} - 1) to keep the cancellation
    // in the exponent where it is benign.
    let u = if b == f64::NEG_INFINITY {
        a.exp()
    } else {
        b.exp() * (a - b).exp_m1()
    };
    Ok(u.max(0.0))
}

/// Independent route: `int G(x, y) m(dy)` with the speed-measure density
/// `(2/eps^2) exp(2B(y)/eps^2)`; equals the expected exit time.
pub fn green_mass_integral(
    drift: &Drift,
    eps: f64,
    x: f64,
    x1: f64,
    x2: f64,
    tol: f64,
) -> Result<f64, LimitError> {
    if x1 == x2 {
        return Err(LimitError::DegenerateInterval { x: x1 });
    }
    let e2 = eps * eps;
    let se = ScaleEval::new(drift, eps, x1, x2, tol.max(1e-12))?;
    let g = |y: f64| {
        // log G(x,y) + log m-density(y)
        se.log_green(x, y) + (2.0 / e2).ln() - se.exponent(y)
    };
    let mut hints = drift.breakpoints(x1, x2, 2048);
    hints.push(x);
    let lg = log_exp_integral(&g, x1, x2, &hints, tol.max(1e-12));
    if lg > 709.0 {
        return Err(LimitError::Overflow { log: lg });
    }
    Ok(lg.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::Drift;

    fn d(text: &str) -> Drift {
        Drift::from_expr_text(text, (-2.0, 2.0)).unwrap()
    }

    #[test]
    fn zero_drift_closed_form() {
        // a = 0: u(x) = (x - x1)(x2 - x)/eps^2.
        let drift = d("0");
        for (x, x1, x2, eps) in [
            (0.3f64, 0.0f64, 1.0f64, 0.7f64),
            (0.0, -1.0, 1.0, 0.25),
            (-0.2, -0.5, 1.5, 1.0),
        ] {
            let exact = (x - x1) * (x2 - x) / (eps * eps);
            let u = expected_exit_time(&drift, eps, x, x1, x2, 1e-12).unwrap();
            assert!(
                (u - exact).abs() <= 1e-8 * exact.abs().max(1e-12),
                "x={x}: {u} vs {exact}"
            );
        }
    }

    #[test]
    fn boundary_values_are_zero() {
        let drift = d("1");
        assert_eq!(
            expected_exit_time(&drift, 0.5, -1.0, -1.0, 1.0, 1e-10).unwrap(),
            0.0
        );
        assert_eq!(
            expected_exit_time(&drift, 0.5, 1.0, -1.0, 1.0, 1e-10).unwrap(),
            0.0
        );
    }

    #[test]
    fn exit_time_golden_repulsive() {
        // a = sign(x) |x|^0.5, eps = 0.5, interval (-1,1), start 0: frozen
        // from an independent double-quadrature evaluation of the same
        // boundary-value formula.
        let drift = d("sign(x)*abs(x)^0.5");
        let u = expected_exit_time(&drift, 0.5, 0.0, -1.0, 1.0, 1e-11).unwrap();
        assert!((u - 1.229_027_447).abs() < 2e-6, "u = {u}");
    }

    #[test]
    fn green_identity_matches_double_integral() {
        // int G dm = u for three drifts x three eps, relative 1e-4.
        let drifts = [d("0"), d("1"), d("sign(x)*abs(x)^0.5")];
        for drift in &drifts {
            for eps in [1.0f64, 0.5, 0.3] {
                let u1 = expected_exit_time(drift, eps, 0.2, -1.0, 1.0, 1e-12).unwrap();
                let u2 = green_mass_integral(drift, eps, 0.2, -1.0, 1.0, 1e-12).unwrap();
                assert!(
                    (u1 - u2).abs() <= 1e-4 * u1.abs().max(1e-12),
                    "{} eps={eps}: {u1} vs {u2}",
                    drift.describe()
                );
            }
        }
    }

    #[test]
    fn repulsive_exit_time_approaches_travel_times() {
        // u(0) -> (1-p) A_-(alpha) + p A_+(beta) = (2+2)/2 = 2 for the odd
        // square-root drift on (-1,1).
        let drift = d("sign(x)*abs(x)^0.5");
        let mut errs = Vec::new();
        for eps in [0.7f64, 0.5, 0.35, 0.25] {
            let u = expected_exit_time(&drift, eps, 0.0, -1.0, 1.0, 1e-12).unwrap();
            errs.push((u - 2.0).abs());
        }
        for w in errs.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "not improving: {errs:?}");
        }
        assert!(errs.last().unwrap() < &0.2, "errs {errs:?}");
    }
}
