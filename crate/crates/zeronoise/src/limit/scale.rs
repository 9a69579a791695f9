//! Scale-function machinery in log domain.
//!
//! Every scale quantity is a ratio of pieces of `int exp(-2B(z)/eps^2) dz`.
//! Pieces are computed as log-values with one shared offset per combination,
//! so ratios stay meaningful down to eps ~ 1e-6 where the raw integrand
//! spans thousands of log-units.

use std::sync::{Arc, Mutex};

use crate::calculus::logint::LogCum;
use crate::calculus::{self, Antiderivative, Side};
use crate::drift::Drift;
use crate::error::{LimitError, QuadError};

/// Largest log-magnitude representable before the linear value overflows.
const LOG_OVERFLOW: f64 = 709.0;

/// Two-sided potential `B(x) = int_0^x a(z) dz` (factor-free; the scale
/// exponent applies 2/eps^2 explicitly).
pub struct Potential {
    plus: Option<Antiderivative>,
    minus: Option<Antiderivative>,
}

impl Potential {
    pub fn build(drift: &Drift, left_extent: f64, right_extent: f64) -> Result<Self, QuadError> {
        let plus = if right_extent > 0.0 {
            Some(calculus::antiderivative_b(
                drift,
                Side::Right,
                right_extent,
                1e-13,
            )?)
        } else {
            None
        };
        let minus = if left_extent > 0.0 {
            Some(calculus::antiderivative_b(
                drift,
                Side::Left,
                left_extent,
                1e-13,
            )?)
        } else {
            None
        };
        Ok(Potential { plus, minus })
    }

    /// B(x) for signed x within the built extents.
    pub fn b(&self, x: f64) -> f64 {
        if x >= 0.0 {
            self.plus.as_ref().map_or(0.0, |p| p.value_u(x))
        } else {
            self.minus.as_ref().map_or(0.0, |m| m.value_u(-x))
        }
    }

    pub fn plus(&self) -> Option<&Antiderivative> {
        self.plus.as_ref()
    }

    pub fn minus(&self) -> Option<&Antiderivative> {
        self.minus.as_ref()
    }
}

/// Scale-function evaluator on a fixed interval `[alpha, beta]` at one eps.
///
/// `s(0) = 0` under the normalization used throughout; all differences of
/// s-values are computed as log-domain integrals over sub-ranges, never as
/// subtraction of two near-equal numbers.
pub struct ScaleEval {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Always true: pieces live in log space.
    pub log_domain: bool,
    g: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    cum: LogCum,
    /// Query cache (r, s_eps(r)); appended on successful raw-value queries.
    s_values: Mutex<Vec<(f64, f64)>>,
}

impl ScaleEval {
    pub fn new(
        drift: &Drift,
        eps: f64,
        alpha: f64,
        beta: f64,
        rel_tol: f64,
    ) -> Result<ScaleEval, LimitError> {
        if !(alpha < beta) {
            return Err(LimitError::DegenerateInterval { x: alpha });
        }
        if eps <= 0.0 {
            return Err(LimitError::RegimeMismatch {
                found: format!("eps must be positive, got {eps}"),
            });
        }
        let pot = Potential::build(drift, (-alpha).max(0.0), beta.max(0.0))
            .map_err(LimitError::Quad)?;
        let pot = Arc::new(pot);
        let e2 = eps * eps;
        let g = {
            let pot = Arc::clone(&pot);
            Arc::new(move |z: f64| -2.0 * pot.b(z) / e2) as Arc<dyn Fn(f64) -> f64 + Send + Sync>
        };
        let hints = drift.breakpoints(alpha, beta, 2048);
        let cum = LogCum::build(&*g, alpha, beta, &hints, rel_tol);
        Ok(ScaleEval {
            eps,
            alpha,
            beta,
            log_domain: true,
            g,
            cum,
            s_values: Mutex::new(Vec::new()),
        })
    }

    /// log of `int_a^b exp(-2B/eps^2)` for alpha <= a <= b <= beta.
    pub fn log_piece(&self, a: f64, b: f64) -> f64 {
        self.cum.log_between(&*self.g, a.max(self.alpha), b.min(self.beta))
    }

    /// Raw s_eps(r) = int_0^r exp(-2B/eps^2) dz; errors with an overflow
    /// sentinel when the linear value exceeds f64 range.
    pub fn s(&self, r: f64) -> Result<f64, LimitError> {
        let (a, b, sign) = if r >= 0.0 {
            (0.0, r, 1.0)
        } else {
            (r, 0.0, -1.0)
        };
        let lg = self.log_piece(a, b);
        if lg > LOG_OVERFLOW {
            return Err(LimitError::Overflow { log: lg });
        }
        let v = sign * lg.exp();
        self.s_values.lock().unwrap().push((r, v));
        Ok(v)
    }

    /// Probability of hitting x1 before x2 starting from x.
    pub fn exit_probability(&self, x: f64, x1: f64, x2: f64) -> Result<f64, LimitError> {
        if x1 == x2 {
            return Err(LimitError::DegenerateInterval { x: x1 });
        }
        if !(x1 <= x && x <= x2) {
            return Err(LimitError::PointOutsideInterval {
                x,
                lo: x1,
                hi: x2,
            });
        }
        let num = self.log_piece(x, x2);
        let den = self.log_piece(x1, x2);
        Ok((num - den).exp().clamp(0.0, 1.0))
    }

    /// Interval exit weight p_eps = -s(alpha) / (s(beta) - s(alpha)): the
    /// probability of leaving through the right end starting from 0.
    pub fn weight(&self) -> f64 {
        let num = self.log_piece(self.alpha, 0.0);
        let den = self.log_piece(self.alpha, self.beta);
        (num - den).exp().clamp(0.0, 1.0)
    }

    /// Green function of the killed diffusion on [alpha, beta]:
    /// G(x, y) = (s(x)-s(x1))(s(x2)-s(y))/(s(x2)-s(x1)) for x <= y, extended
    /// symmetrically.
    pub fn green(&self, x: f64, y: f64) -> Result<f64, LimitError> {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        if !(self.alpha <= lo && hi <= self.beta) {
            return Err(LimitError::PointOutsideInterval {
                x: lo,
                lo: self.alpha,
                hi: self.beta,
            });
        }
        let lg = self.log_piece(self.alpha, lo) + self.log_piece(hi, self.beta)
            - self.log_piece(self.alpha, self.beta);
        if lg > LOG_OVERFLOW {
            return Err(LimitError::Overflow { log: lg });
        }
        Ok(lg.exp())
    }

    /// log G(x, y), usable beyond the overflow range of [`Self::green`].
    pub fn log_green(&self, x: f64, y: f64) -> f64 {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        self.log_piece(self.alpha, lo) + self.log_piece(hi, self.beta)
            - self.log_piece(self.alpha, self.beta)
    }

    /// `-2 B(y) / eps^2` (the scale integrand exponent at y).
    pub fn exponent(&self, y: f64) -> f64 {
        (self.g)(y)
    }

    /// Recorded raw s-value queries.
    pub fn s_values(&self) -> Vec<(f64, f64)> {
        self.s_values.lock().unwrap().clone()
    }
}

/// One-shot s_eps(r) = int_0^r exp(-(2/eps^2) int_0^z a) dz.
pub fn scale_function(drift: &Drift, eps: f64, r: f64, tol: f64) -> Result<f64, LimitError> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let (alpha, beta) = if r > 0.0 {
        (-1e-12 * r, r)
    } else {
        (r, -1e-12 * r)
    };
    let se = ScaleEval::new(drift, eps, alpha, beta, tol)?;
    se.s(r)
}

/// Probability of hitting x1 before x2 from x, by scale ratios.
pub fn exit_probability(
    drift: &Drift,
    eps: f64,
    x: f64,
    x1: f64,
    x2: f64,
) -> Result<f64, LimitError> {
    if x1 == x2 {
        return Err(LimitError::DegenerateInterval { x: x1 });
    }
    let se = ScaleEval::new(drift, eps, x1, x2, 1e-11)?;
    se.exit_probability(x, x1, x2)
}

/// Weight of the right extremal branch at noise level eps; requires the
/// repulsive sign pattern (drift negative left of 0, positive right of 0).
pub fn weight_p_eps(
    drift: &Drift,
    eps: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64, LimitError> {
    if !(alpha < 0.0 && 0.0 < beta) {
        return Err(LimitError::PointOutsideInterval {
            x: 0.0,
            lo: alpha,
            hi: beta,
        });
    }
    let cls = drift.classification();
    if !cls.repulsive_sign_pattern() {
        return Err(LimitError::RegimeMismatch {
            found: format!("{:?}/{:?} sign pattern", cls.left_sign, cls.right_sign),
        });
    }
    let se = ScaleEval::new(drift, eps, alpha, beta, 1e-11)?;
    Ok(se.weight())
}

/// Green function value (raw scale).
pub fn green_function(
    drift: &Drift,
    eps: f64,
    x1: f64,
    x2: f64,
    x: f64,
    y: f64,
) -> Result<f64, LimitError> {
    if x1 == x2 {
        return Err(LimitError::DegenerateInterval { x: x1 });
    }
    let se = ScaleEval::new(drift, eps, x1, x2, 1e-11)?;
    se.green(x, y)
}
