//! Drift construction, evaluation and near-origin classification.

pub mod builtins;
pub mod expr;
pub mod parser;

use std::sync::{Arc, OnceLock};

pub use builtins::Builtin;
pub use expr::DriftExpr;
pub use parser::parse_drift;

use crate::calculus;
use crate::error::{DriftError, EvalError};

/// Bound above which a drift is rejected as not essentially bounded on its
/// window.
const SUP_CAP: f64 = 1e6;

#[derive(Debug, Clone)]
pub enum DriftSource {
    Expr { ast: DriftExpr, text: String },
    Builtin(Builtin),
}

/// An evaluable drift with its analysis window and cached classification.
///
/// Values are immutable after construction; evaluation is pure, so a `Drift`
/// can be shared freely across threads.
#[derive(Debug, Clone)]
pub struct Drift {
    source: DriftSource,
    window: (f64, f64),
    sup_bound: f64,
    /// Value substituted when the expression has a point singularity
    /// (the a(0) convention; odd built-in families define a(0) = 0).
    singular_value: f64,
    profile: Arc<OnceLock<SignClassification>>,
}

impl Drift {
    /// Build from DSL source text.
    pub fn from_expr_text(text: &str, window: (f64, f64)) -> Result<Drift, DriftError> {
        let ast = parse_drift(text)?;
        Self::from_expr(ast, text.to_string(), window)
    }

    pub fn from_expr(ast: DriftExpr, text: String, window: (f64, f64)) -> Result<Drift, DriftError> {
        let d = Drift {
            source: DriftSource::Expr { ast, text },
            window,
            sup_bound: 0.0,
            singular_value: 0.0,
            profile: Arc::new(OnceLock::new()),
        };
        d.finish()
    }

    pub fn from_builtin(b: Builtin, window: (f64, f64)) -> Result<Drift, DriftError> {
        let d = Drift {
            source: DriftSource::Builtin(b),
            window,
            sup_bound: 0.0,
            singular_value: 0.0,
            profile: Arc::new(OnceLock::new()),
        };
        d.finish()
    }

    fn finish(mut self) -> Result<Drift, DriftError> {
        let (lo, hi) = self.window;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(DriftError::BadWindow { lo, hi });
        }
        let mut sup: f64 = 0.0;
        let mut check = |d: &Drift, x: f64| -> Result<(), DriftError> {
            match d.eval(x) {
                Ok(v) => {
                    if !v.is_finite() {
                        return Err(DriftError::NonFinite { at: x });
                    }
                    sup = sup.max(v.abs());
                    Ok(())
                }
                Err(EvalError::Singular { .. }) => Ok(()), // isolated points allowed
                Err(EvalError::NonFiniteInput) => Ok(()),
            }
        };
        for i in 0..=4096 {
            let x = lo + (hi - lo) * i as f64 / 4096.0;
            check(&self, x)?;
        }
        for j in 0..=60 {
            let s = 0.5f64.powi(j);
            for side in [-1.0, 1.0] {
                let x = side * s * if side < 0.0 { lo.abs() } else { hi.abs() };
                if x > lo && x < hi {
                    check(&self, x)?;
                }
            }
        }
        if sup > SUP_CAP {
            return Err(DriftError::Unbounded {
                cap: SUP_CAP,
                at: 0.0,
            });
        }
        self.sup_bound = sup;
        Ok(self)
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn source(&self) -> &DriftSource {
        &self.source
    }

    pub fn describe(&self) -> String {
        match &self.source {
            DriftSource::Expr { text, .. } => text.clone(),
            DriftSource::Builtin(b) => b.name(),
        }
    }

    /// Strict evaluation: singularities surface as errors.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        match &self.source {
            DriftSource::Expr { ast, .. } => ast.eval(x),
            DriftSource::Builtin(b) => {
                if x.is_finite() {
                    Ok(b.eval(x))
                } else {
                    Err(EvalError::NonFiniteInput)
                }
            }
        }
    }

    /// Simulation evaluation: point singularities take the declared
    /// convention value (default 0), so the Euler scheme is total.
    pub fn eval_sim(&self, x: f64) -> f64 {
        self.eval(x).unwrap_or(self.singular_value)
    }

    /// Quadrature panel hints: breakpoints of the drift within (lo, hi).
    pub fn breakpoints(&self, lo: f64, hi: f64, cap: usize) -> Vec<f64> {
        match &self.source {
            DriftSource::Expr { ast, .. } => {
                let mut pts = Vec::new();
                ast.breakpoints_in(lo, hi, cap, &mut pts);
                if lo < 0.0 && hi > 0.0 {
                    pts.push(0.0);
                }
                pts.retain(|&p| p > lo && p < hi);
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                pts.truncate(cap);
                pts
            }
            DriftSource::Builtin(b) => b.breakpoints(lo, hi, cap),
        }
    }

    /// Build from DSL text, promoting the canonical oscillating family
    /// `sign(x)*abs(x)^rho*(1+0.5*phi(1/x))` to its built-in form so that its
    /// integrals are computed exactly instead of by jump-chasing quadrature.
    /// The evaluated function is identical except at the single point x = 0,
    /// where the built-in uses the declared convention a(0) = 0 directly.
    pub fn from_expr_text_promoted(text: &str, window: (f64, f64)) -> Result<Drift, DriftError> {
        let ast = parse_drift(text)?;
        if let Some(rho) = recognize_oscillating(&ast) {
            let b = Builtin::example1(rho).map_err(DriftError::BadParam)?;
            return Drift::from_builtin(b, window);
        }
        Self::from_expr(ast, text.to_string(), window)
    }

    pub(crate) fn builtin(&self) -> Option<&Builtin> {
        match &self.source {
            DriftSource::Builtin(b) => Some(b),
            _ => None,
        }
    }

    /// Cached classification with default probe radii.
    pub fn classification(&self) -> &SignClassification {
        self.profile.get_or_init(|| {
            let (lo, hi) = self.window;
            let delta0 = 0.9 * lo.abs().min(hi.abs()).min(1.0).max(1e-6);
            let r = delta0;
            classify_near_zero(self, delta0, r)
        })
    }
}

/// Match `sign(x) * abs(x)^rho * (1 + 0.5*phi(1/x))` up to factor order,
/// returning rho. Only the exact half-amplitude family has a built-in.
pub fn recognize_oscillating(ast: &DriftExpr) -> Option<f64> {
    use expr::{BinaryOp, UnaryOp};
    let mut factors = Vec::new();
    flatten_mul(ast, &mut factors);
    if factors.len() != 3 {
        return None;
    }
    let mut rho = None;
    let mut saw_sign = false;
    let mut saw_osc = false;
    for f in factors {
        match f {
            DriftExpr::Unary(UnaryOp::Sign, inner) if **inner == DriftExpr::X => {
                saw_sign = true;
            }
            DriftExpr::Pow(base, e) => {
                if let DriftExpr::Unary(UnaryOp::Abs, inner) = &**base {
                    if **inner == DriftExpr::X && *e > 0.0 && *e < 1.0 {
                        rho = Some(*e);
                    }
                }
            }
            DriftExpr::Binary(BinaryOp::Add, a, b) => {
                let (one, osc) = if **a == DriftExpr::Const(1.0) {
                    (true, &**b)
                } else if **b == DriftExpr::Const(1.0) {
                    (true, &**a)
                } else {
                    (false, &**a)
                };
                if !one {
                    return None;
                }
                let (c, phi_arg) = match osc {
                    DriftExpr::Binary(BinaryOp::Mul, x, y) => match (&**x, &**y) {
                        (DriftExpr::Const(c), DriftExpr::Phi(arg)) => (*c, &**arg),
                        (DriftExpr::Phi(arg), DriftExpr::Const(c)) => (*c, &**arg),
                        _ => return None,
                    },
                    _ => return None,
                };
                let inv_x = matches!(
                    phi_arg,
                    DriftExpr::Binary(BinaryOp::Div, n, d)
                        if **n == DriftExpr::Const(1.0) && **d == DriftExpr::X
                );
                if c == 0.5 && inv_x {
                    saw_osc = true;
                } else {
                    return None;
                }
            }
            _ => return None,
        }
    }
    if saw_sign && saw_osc {
        rho
    } else {
        None
    }
}

fn flatten_mul<'a>(ast: &'a DriftExpr, out: &mut Vec<&'a DriftExpr>) {
    if let DriftExpr::Binary(expr::BinaryOp::Mul, a, b) = ast {
        flatten_mul(a, out);
        flatten_mul(b, out);
    } else {
        out.push(ast);
    }
}

/// Sign of the drift on one side of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SideSign {
    Positive,
    Negative,
    Zero,
    Mixed,
}

/// Convergence of the one-sided reciprocal integral toward the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OsgoodFlag {
    Finite,
    Divergent,
}

/// Which limit theorem applies near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    PositiveDrift,
    NegativeDrift,
    Repulsive,
    Unsupported,
}

/// Near-origin sign pattern and one-sided reciprocal-integral flags.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SignClassification {
    pub left_sign: SideSign,
    pub right_sign: SideSign,
    pub osgood_left: OsgoodFlag,
    pub osgood_right: OsgoodFlag,
    pub regime: Regime,
    /// Human-readable notes (undecided integrals, probe radii).
    pub notes: String,
}

impl SignClassification {
    pub fn repulsive_sign_pattern(&self) -> bool {
        self.left_sign == SideSign::Negative && self.right_sign == SideSign::Positive
    }
}

/// Classify the drift near the origin by dense sign sampling on (+-delta0, 0)
/// and divergence-detecting quadrature of 1/a toward 0 up to radius `r`.
///
/// Signs are decided on a geometric grid `+-delta0 2^-j`, j = 0..60, plus
/// 1000 uniform points per side; almost-everywhere conditions are thereby
/// approximated deterministically.
pub fn classify_near_zero(drift: &Drift, delta0: f64, r: f64) -> SignClassification {
    let side_sign = |sgn: f64| -> SideSign {
        let tiny = 1e-12 * drift.sup_bound.max(1.0);
        let mut pos = 0usize;
        let mut neg = 0usize;
        let mut probe = |x: f64| {
            let v = drift.eval_sim(x);
            if v > tiny {
                pos += 1;
            } else if v < -tiny {
                neg += 1;
            }
        };
        for j in 0..=60 {
            probe(sgn * delta0 * 0.5f64.powi(j));
        }
        for i in 1..=1000 {
            probe(sgn * delta0 * i as f64 / 1000.0);
        }
        match (pos > 0, neg > 0) {
            (true, false) => SideSign::Positive,
            (false, true) => SideSign::Negative,
            (false, false) => SideSign::Zero,
            (true, true) => SideSign::Mixed,
        }
    };
    let right_sign = side_sign(1.0);
    let left_sign = side_sign(-1.0);
    let mut notes = String::new();

    // One-sided reciprocal integrals are meaningful only when the side moves
    // away from the origin (positive to the right, negative to the left);
    // otherwise escape that way is impossible and the flag is divergent.
    let osgood_right = if right_sign == SideSign::Positive {
        match calculus::osgood_integral(drift, calculus::Side::Right, r, 1e-9) {
            Ok(res) if res.converged() => OsgoodFlag::Finite,
            Ok(_) => OsgoodFlag::Divergent,
            Err(e) => {
                notes.push_str(&format!("right reciprocal integral: {e}; "));
                OsgoodFlag::Divergent
            }
        }
    } else {
        OsgoodFlag::Divergent
    };
    let osgood_left = if left_sign == SideSign::Negative {
        match calculus::osgood_integral(drift, calculus::Side::Left, r, 1e-9) {
            Ok(res) if res.converged() => OsgoodFlag::Finite,
            Ok(_) => OsgoodFlag::Divergent,
            Err(e) => {
                notes.push_str(&format!("left reciprocal integral: {e}; "));
                OsgoodFlag::Divergent
            }
        }
    } else {
        OsgoodFlag::Divergent
    };

    let regime = if left_sign == SideSign::Negative
        && right_sign == SideSign::Positive
        && osgood_left == OsgoodFlag::Finite
        && osgood_right == OsgoodFlag::Finite
    {
        Regime::Repulsive
    } else if right_sign == SideSign::Positive
        && osgood_right == OsgoodFlag::Finite
        && matches!(left_sign, SideSign::Positive | SideSign::Zero)
    {
        Regime::PositiveDrift
    } else if left_sign == SideSign::Negative
        && osgood_left == OsgoodFlag::Finite
        && matches!(right_sign, SideSign::Negative | SideSign::Zero)
    {
        Regime::NegativeDrift
    } else {
        Regime::Unsupported
    };
    notes.push_str(&format!("probe radii delta0={delta0}, r={r}"));
    SignClassification {
        left_sign,
        right_sign,
        osgood_left,
        osgood_right,
        regime,
        notes,
    }
}
