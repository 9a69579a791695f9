//! Singular-integral quadrature, antiderivatives of `1/a` and `a`, and
//! monotone inversion.

pub mod anti;
pub mod logint;
pub mod quad;

use std::sync::Arc;

pub use anti::{AntiKind, Antiderivative, EndMode, Side};
pub use quad::{integrate, integrate_hinted, QuadratureResult, Verdict};

use crate::drift::Drift;
use crate::error::QuadError;

/// Working-axis drift: the right side as-is, the left side reflected so that
/// an outward-moving drift is positive on (0, r].
pub(crate) fn working_drift(drift: &Drift, side: Side) -> impl Fn(f64) -> f64 + Send + Sync {
    let d = drift.clone();
    move |u: f64| match side {
        Side::Right => d.eval_sim(u),
        Side::Left => -d.eval_sim(-u),
    }
}

/// Working-axis breakpoints within (0, r].
fn working_hints(drift: &Drift, side: Side, r: f64, cap: usize) -> Vec<f64> {
    let pts = match side {
        Side::Right => drift.breakpoints(0.0, r, cap),
        Side::Left => drift.breakpoints(-r, 0.0, cap),
    };
    let mut out: Vec<f64> = pts
        .into_iter()
        .map(|p| match side {
            Side::Right => p,
            Side::Left => -p,
        })
        .filter(|&u| u > 0.0 && u < r)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// One-sided reciprocal integral `int_0^r dz/a(z)` (right) or
/// `-int_{-r}^0 dz/a(z)` (left), with divergence detection toward the origin.
///
/// The drift must keep the outward sign on the side: positive to the right,
/// negative to the left; a wrong-signed grid point is an error.
pub fn osgood_integral(
    drift: &Drift,
    side: Side,
    r: f64,
    tol: f64,
) -> Result<QuadratureResult, QuadError> {
    assert!(r > 0.0);
    let au = working_drift(drift, side);
    check_outward_sign(drift, &au, side, r)?;
    let hints = working_hints(drift, side, r, 4096);
    let f = move |u: f64| {
        let v = au(u);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / v
        }
    };
    Ok(quad::singular_edge_scan(&f, 0.0, r, true, tol, &hints))
}

fn check_outward_sign(
    drift: &Drift,
    au: &(impl Fn(f64) -> f64 + ?Sized),
    side: Side,
    r: f64,
) -> Result<(), QuadError> {
    let tiny = -1e-12 * drift.sup_bound().max(1.0);
    let side_name = match side {
        Side::Right => "right",
        Side::Left => "left",
    };
    let mut worst: Option<f64> = None;
    let mut probe = |u: f64| {
        if au(u) < tiny {
            worst.get_or_insert(u);
        }
    };
    for j in 0..=60 {
        probe(r * 0.5f64.powi(j));
    }
    for i in 1..=1000 {
        probe(r * i as f64 / 1000.0);
    }
    if let Some(u) = worst {
        return Err(QuadError::SignViolation {
            side: side_name,
            at: match side {
                Side::Right => u,
                Side::Left => -u,
            },
        });
    }
    Ok(())
}

/// First blocking zero of the working drift on (0, r]: the earliest point
/// where `a` vanishes ahead of the flow and the reciprocal integral into it
/// from beyond diverges (so the noiseless solution cannot pass).
fn detect_blocking_zero(
    au: &(impl Fn(f64) -> f64 + Sync + ?Sized),
    r: f64,
    sup: f64,
) -> Option<(f64, bool)> {
    let tiny = 1e-9 * sup.max(1.0);
    // Dense forward scan for the first non-positive stretch.
    let n = 8192;
    let mut prev_good: Option<f64> = None;
    let mut hit: Option<f64> = None;
    for i in 1..=n {
        let u = r * i as f64 / n as f64;
        let v = au(u);
        if v > tiny {
            if hit.is_some() {
                // Drift recovered: check whether the zero actually blocks.
                break;
            }
            prev_good = Some(u);
        } else if hit.is_none() {
            hit = Some(u);
        }
    }
    let first_bad = hit?;
    // Bisect the boundary of positivity.
    let mut lo = prev_good.unwrap_or(first_bad * 0.5);
    let mut hi = first_bad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if au(mid) > tiny {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * r {
            break;
        }
    }
    let zstar = 0.5 * (lo + hi);
    // Forward test: does 1/a fail to be integrable just beyond z*?
    let delta = (r - zstar).min(zstar).min(0.25 * r).max(1e-12 * r);
    if delta <= 0.0 {
        return Some((zstar, true));
    }
    let any_negative = (1..=64).any(|i| au(zstar + delta * i as f64 / 64.0) <= tiny);
    if any_negative {
        return Some((zstar, true));
    }
    let f = |u: f64| {
        let v = au(u);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / v
        }
    };
    let fwd = quad::singular_edge_scan(&f, zstar, delta, true, 1e-9, &[]);
    Some((zstar, fwd.verdict != Verdict::Converged))
}

/// Antiderivative `A(x) = int_0^x dz/a(z)` on one side, up to `r` or up to a
/// detected blocking zero `R` before it (with plateau time `A(R)` when that
/// limit is finite).
pub fn antiderivative_a(
    drift: &Drift,
    side: Side,
    r: f64,
    tol: f64,
) -> Result<Antiderivative, QuadError> {
    let au = working_drift(drift, side);
    // The sign must be outward near the origin; further out a zero may
    // legitimately end the domain (blocking-zero detection below).
    check_outward_sign(drift, &au, side, 0.02 * r)?;
    let hints = working_hints(drift, side, r, 4096);
    let exact = drift
        .builtin()
        .and_then(|b| b.exact_a(side == Side::Right));
    if let Some(ex) = exact {
        let f = to_reciprocal(au);
        return Antiderivative::build(
            side,
            AntiKind::TimeScale,
            Arc::new(f),
            Some(ex),
            r,
            true,
            EndMode::Plain,
            &hints,
            tol,
        );
    }
    let sup = drift.sup_bound();
    let block = detect_blocking_zero(&au, r, sup);
    let f = Arc::new(to_reciprocal(au));
    match block {
        Some((zstar, true)) => {
            // Is the approach integrable (finite plateau time)?
            let width = (zstar * 0.5).min(zstar - 1e-15 * r).max(1e-12 * r);
            let back = quad::singular_edge_scan(&*f, zstar, width, false, tol, &hints);
            if back.verdict == Verdict::Converged {
                let anti = Antiderivative::build(
                    side,
                    AntiKind::TimeScale,
                    f,
                    None,
                    zstar,
                    true,
                    EndMode::FinitePlateau,
                    &hints,
                    tol,
                )?;
                let t = anti.range().1;
                Ok(anti.with_singularity(Some(zstar), Some(t)))
            } else {
                let anti = Antiderivative::build(
                    side,
                    AntiKind::TimeScale,
                    f,
                    None,
                    zstar,
                    true,
                    EndMode::Asymptote,
                    &hints,
                    tol,
                )?;
                Ok(anti.with_singularity(Some(zstar), None))
            }
        }
        Some((zstar, false)) => {
            // Non-blocking interior zero: pass through; seed a panel edge.
            let mut h = hints.clone();
            h.push(zstar);
            h.sort_by(f64::total_cmp);
            Antiderivative::build(
                side,
                AntiKind::TimeScale,
                f,
                None,
                r,
                true,
                EndMode::Plain,
                &h,
                tol,
            )
        }
        None => Antiderivative::build(
            side,
            AntiKind::TimeScale,
            f,
            None,
            r,
            true,
            EndMode::Plain,
            &hints,
            tol,
        ),
    }
}

fn to_reciprocal(
    au: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |u: f64| {
        let v = au(u);
        if v <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / v
        }
    }
}

/// Antiderivative `B(x) = int_0^x a(z) dz` on one side (factor-free: every
/// consumer applies 2/eps^2 itself).
pub fn antiderivative_b(
    drift: &Drift,
    side: Side,
    r: f64,
    tol: f64,
) -> Result<Antiderivative, QuadError> {
    let au = working_drift(drift, side);
    let hints = working_hints(drift, side, r, 4096);
    let exact = drift
        .builtin()
        .and_then(|b| b.exact_b(side == Side::Right));
    Antiderivative::build(
        side,
        AntiKind::Potential,
        Arc::new(au),
        exact,
        r,
        false,
        EndMode::Plain,
        &hints,
        tol,
    )
}

/// Invert a monotone antiderivative at `y` (signed-axis result) to
/// |F(x) - y| <= tol (1 + |y|).
pub fn invert_monotone(f: &Antiderivative, y: f64, tol: f64) -> Result<f64, QuadError> {
    f.invert(y, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::Drift;

    fn d(text: &str) -> Drift {
        Drift::from_expr_text(text, (-2.0, 2.0)).unwrap()
    }

    #[test]
    fn osgood_sqrt_right() {
        // a = x^0.5 (via sign/abs so the left side is odd): int_0^1 z^-0.5 = 2.
        let drift = d("sign(x)*abs(x)^0.5");
        let r = osgood_integral(&drift, Side::Right, 1.0, 1e-10).unwrap();
        assert!(r.converged());
        assert!((r.value - 2.0).abs() < 1e-7, "value {}", r.value);
        let l = osgood_integral(&drift, Side::Left, 1.0, 1e-10).unwrap();
        assert!(l.converged());
        assert!((l.value - 2.0).abs() < 1e-7);
    }

    #[test]
    fn osgood_linear_divergent() {
        let drift = d("x");
        let r = osgood_integral(&drift, Side::Right, 1.0, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Divergent);
    }

    #[test]
    fn osgood_sign_violation() {
        let drift = d("0-1");
        let e = osgood_integral(&drift, Side::Right, 1.0, 1e-9);
        assert!(matches!(e, Err(QuadError::SignViolation { .. })));
    }

    #[test]
    fn osgood_example1_golden() {
        // Quadrature route against the frozen high-precision value.
        let drift = d("sign(x)*abs(x)^0.5*(1+0.5*phi(1/x))");
        let r = osgood_integral(&drift, Side::Right, 1.0, 1e-9).unwrap();
        assert!(r.converged());
        assert!(
            (r.value - 2.386_936_95).abs() < 2e-4,
            "value {} vs 2.38693695",
            r.value
        );
        assert!(r.value > 4.0 / 3.0 && r.value < 4.0);
    }

    #[test]
    fn antiderivative_a_closed_forms() {
        // a = c: A = x/c exactly linear.
        let drift = d("2");
        let a = antiderivative_a(&drift, Side::Right, 1.0, 1e-12).unwrap();
        for &x in &[0.1, 0.5, 1.0] {
            assert!((a.value(x) - x / 2.0).abs() < 1e-12);
        }
        // a = sqrt: A = 2 sqrt(x).
        let drift = d("sign(x)*abs(x)^0.5");
        let a = antiderivative_a(&drift, Side::Right, 1.0, 1e-12).unwrap();
        for &x in &[0.01, 0.25, 1.0] {
            assert!(
                (a.value(x) - 2.0 * x.sqrt()).abs() < 1e-8,
                "x={x}: {}",
                a.value(x)
            );
        }
        assert!(a.r_singular.is_none());
    }

    #[test]
    fn plateau_detection() {
        // a = 2 sqrt(max(1-x, 0)): A = 1 - sqrt(1-x), R = 1, plateau t = 1.
        let drift = d("2*sqrt(max(1-x,0))");
        let a = antiderivative_a(&drift, Side::Right, 1.5, 1e-10).unwrap();
        let r = a.r_singular.expect("blocking zero at 1");
        assert!((r - 1.0).abs() < 1e-6, "R = {r}");
        let t = a.t_plateau.expect("finite plateau time");
        assert!((t - 1.0).abs() < 1e-6, "t = {t}");
        for &x in &[0.1f64, 0.5, 0.9] {
            let exact = 1.0 - (1.0 - x).sqrt();
            assert!((a.value(x) - exact).abs() < 1e-8, "x={x}: {}", a.value(x));
        }
    }

    #[test]
    fn inversion_examples() {
        // F = A of a = sqrt: A = 2 sqrt(x); y = 1 -> x = 0.25.
        let drift = d("sign(x)*abs(x)^0.5");
        let a = antiderivative_a(&drift, Side::Right, 1.0, 1e-12).unwrap();
        let x = invert_monotone(&a, 1.0, 1e-10).unwrap();
        assert!((x - 0.25).abs() < 1e-8);
        assert!(invert_monotone(&a, 99.0, 1e-10).is_err());
    }

    #[test]
    fn antiderivative_b_forms() {
        let drift = d("1");
        let b = antiderivative_b(&drift, Side::Right, 1.0, 1e-12).unwrap();
        assert!((b.value(0.7) - 0.7).abs() < 1e-12);
        let drift = d("sign(x)*abs(x)^0.5");
        let b = antiderivative_b(&drift, Side::Right, 1.0, 1e-12).unwrap();
        assert!((b.value(0.5) - 0.5f64.powf(1.5) / 1.5).abs() < 1e-10);
        // Odd drift: B is even, so the left potential matches the right one.
        let bl = antiderivative_b(&drift, Side::Left, 1.0, 1e-12).unwrap();
        assert!((bl.value(-0.5) - b.value(0.5)).abs() < 1e-10);
    }

    #[test]
    fn strict_monotonicity_and_round_trip() {
        let drift = d("sign(x)*abs(x)^0.75");
        let a = antiderivative_a(&drift, Side::Right, 1.0, 1e-12).unwrap();
        let mut s = 7u64;
        let mut prev = -1.0;
        for i in 0..100 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(11);
            let x = ((s >> 11) as f64 / (1u64 << 53) as f64).max(1e-6);
            let y = a.value_u(x);
            let back = a.invert_u(y, 1e-11).unwrap();
            assert!(
                (a.value_u(back) - y).abs() <= 1e-10 * (1.0 + y.abs()),
                "iteration {i}"
            );
            let grid_y = a.value_u(i as f64 / 100.0 + 0.005);
            assert!(grid_y > prev, "not strictly increasing");
            prev = grid_y;
        }
    }
}
