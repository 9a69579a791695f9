//! Drift expression AST, evaluation and printing.
//!
//! The expression language is a small total language over one variable `x`:
//! constants, arithmetic, `abs`/`sign`/`sqrt`/`floor`, `min`/`max`, powers
//! with constant exponent, the square-wave `phi`, interval indicators and a
//! lazy conditional `piece`. Evaluation either yields a finite real or a
//! declared point singularity (division by zero, fractional power of a
//! negative base, ...); it never panics and never returns NaN wrapped in `Ok`.

use crate::error::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Abs,
    Sign,
    Floor,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

/// Parsed drift expression.
///
/// `Pow` keeps its exponent as a bare constant: the grammar only admits
/// numeric literals after `^`, which keeps every power analyzable.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftExpr {
    Const(f64),
    X,
    Unary(UnaryOp, Box<DriftExpr>),
    Binary(BinaryOp, Box<DriftExpr>, Box<DriftExpr>),
    Pow(Box<DriftExpr>, f64),
    /// Square wave: +1 on [2n-1, 2n), -1 on [2n, 2n+1).
    Phi(Box<DriftExpr>),
    /// Indicator of x in [lo, hi).
    Ind(Box<DriftExpr>, Box<DriftExpr>),
    /// piece(c, t, e): t if c > 0 else e. Branches evaluate lazily.
    Piece(Box<DriftExpr>, Box<DriftExpr>, Box<DriftExpr>),
}

/// Square wave phi(y) = sum_n 1_[2n-1,2n) - 1_[2n,2n+1): +1 iff floor(y) is odd.
///
/// Beyond 2^53 every f64 is an even integer, so the wave is -1 there; the
/// same branch is used for infinite arguments.
pub fn phi(y: f64) -> f64 {
    // 2^53: above this every f64 is an even integer.
    if !y.is_finite() || y.abs() >= 9_007_199_254_740_992.0 {
        return -1.0;
    }
    let n = y.floor() as i64;
    if n & 1 != 0 {
        1.0
    } else {
        -1.0
    }
}

fn finite(x: f64, v: f64, what: &'static str) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Singular { x, what })
    }
}

impl DriftExpr {
    /// Evaluate at `x`. Any undefined sub-expression surfaces as a declared
    /// point singularity; finite results are guaranteed finite.
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        if !x.is_finite() {
            return Err(EvalError::NonFiniteInput);
        }
        self.eval_inner(x)
    }

    fn eval_inner(&self, x: f64) -> Result<f64, EvalError> {
        use DriftExpr::*;
        match self {
            Const(c) => Ok(*c),
            X => Ok(x),
            Unary(op, e) => {
                let v = e.eval_inner(x)?;
                let r = match op {
                    UnaryOp::Neg => -v,
                    UnaryOp::Abs => v.abs(),
                    UnaryOp::Sign => {
                        if v > 0.0 {
                            1.0
                        } else if v < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    UnaryOp::Floor => v.floor(),
                    UnaryOp::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError::Singular {
                                x,
                                what: "sqrt of negative value",
                            });
                        }
                        v.sqrt()
                    }
                };
                finite(x, r, "non-finite unary result")
            }
            Binary(op, a, b) => {
                let va = a.eval_inner(x)?;
                let vb = b.eval_inner(x)?;
                let r = match op {
                    BinaryOp::Add => va + vb,
                    BinaryOp::Sub => va - vb,
                    BinaryOp::Mul => va * vb,
                    BinaryOp::Div => {
                        if vb == 0.0 {
                            return Err(EvalError::Singular {
                                x,
                                what: "division by zero",
                            });
                        }
                        va / vb
                    }
                    BinaryOp::Min => va.min(vb),
                    BinaryOp::Max => va.max(vb),
                };
                finite(x, r, "non-finite arithmetic result")
            }
            Pow(base, expo) => {
                let vb = base.eval_inner(x)?;
                if vb < 0.0 && expo.fract() != 0.0 {
                    return Err(EvalError::Singular {
                        x,
                        what: "fractional power of negative base",
                    });
                }
                if vb == 0.0 && *expo < 0.0 {
                    return Err(EvalError::Singular {
                        x,
                        what: "zero base with negative exponent",
                    });
                }
                finite(x, vb.powf(*expo), "non-finite power")
            }
            Phi(e) => {
                // 1/x overflows to +/-inf for subnormal x; phi handles that
                // branch itself, so only propagate genuine errors.
                match e.eval_inner(x) {
                    Ok(v) => Ok(phi(v)),
                    Err(EvalError::Singular { .. }) => Err(EvalError::Singular {
                        x,
                        what: "singular phi argument",
                    }),
                    Err(e) => Err(e),
                }
            }
            Ind(lo, hi) => {
                let l = lo.eval_inner(x)?;
                let h = hi.eval_inner(x)?;
                Ok(if l <= x && x < h { 1.0 } else { 0.0 })
            }
            Piece(c, t, e) => {
                let vc = c.eval_inner(x)?;
                if vc > 0.0 {
                    t.eval_inner(x)
                } else {
                    e.eval_inner(x)
                }
            }
        }
    }

    /// Fold constant subtrees. Folding is conservative: anything that would
    /// raise a singularity (1/0, sqrt(-1), ...) is left unfolded so the error
    /// surfaces at evaluation time with its position in x.
    pub fn fold(self) -> DriftExpr {
        use DriftExpr::*;
        match self {
            Const(_) | X => self,
            Unary(op, e) => {
                let e = e.fold();
                if let Const(c) = e {
                    if let Ok(v) = Unary(op, Box::new(Const(c))).eval(0.0) {
                        return Const(v);
                    }
                }
                Unary(op, Box::new(e))
            }
            Binary(op, a, b) => {
                let a = a.fold();
                let b = b.fold();
                if let (Const(ca), Const(cb)) = (&a, &b) {
                    if let Ok(v) = Binary(op, Box::new(Const(*ca)), Box::new(Const(*cb))).eval(0.0)
                    {
                        return Const(v);
                    }
                }
                Binary(op, Box::new(a), Box::new(b))
            }
            Pow(base, expo) => {
                let base = base.fold();
                if let Const(c) = base {
                    if let Ok(v) = Pow(Box::new(Const(c)), expo).eval(0.0) {
                        return Const(v);
                    }
                }
                Pow(Box::new(base), expo)
            }
            Phi(e) => {
                let e = e.fold();
                if let Const(c) = e {
                    return Const(phi(c));
                }
                Phi(Box::new(e))
            }
            Ind(lo, hi) => Ind(Box::new(lo.fold()), Box::new(hi.fold())),
            Piece(c, t, e) => Piece(Box::new(c.fold()), Box::new(t.fold()), Box::new(e.fold())),
        }
    }

    /// Canonical text form; `parse(print(e)) == e` for folded expressions.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        self.print(&mut s, 0);
        s
    }

    // Precedence: 0 additive, 1 multiplicative, 2 power base, 3 atom.
    fn print(&self, out: &mut String, min_prec: u8) {
        use DriftExpr::*;
        let prec = match self {
            Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 0,
            Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 1,
            Unary(UnaryOp::Neg, _) => 1,
            Pow(..) => 2,
            _ => 3,
        };
        let parens = prec < min_prec;
        if parens {
            out.push('(');
        }
        match self {
            Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    // Negative literal prints as a unary minus expression.
                    out.push('-');
                    out.push_str(&format_num(-*c));
                } else {
                    out.push_str(&format_num(*c));
                }
            }
            X => out.push('x'),
            Unary(UnaryOp::Neg, e) => {
                out.push('-');
                e.print(out, 2);
            }
            Unary(op, e) => {
                out.push_str(match op {
                    UnaryOp::Abs => "abs",
                    UnaryOp::Sign => "sign",
                    UnaryOp::Floor => "floor",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                });
                out.push('(');
                e.print(out, 0);
                out.push(')');
            }
            Binary(op, a, b) => {
                let (sym, lp, rp) = match op {
                    BinaryOp::Add => ("+", 0, 0),
                    // Right operand of - and / binds one level tighter.
                    BinaryOp::Sub => ("-", 0, 1),
                    BinaryOp::Mul => ("*", 1, 1),
                    BinaryOp::Div => ("/", 1, 2),
                    BinaryOp::Min | BinaryOp::Max => {
                        out.push_str(if *op == BinaryOp::Min { "min" } else { "max" });
                        out.push('(');
                        a.print(out, 0);
                        out.push(',');
                        b.print(out, 0);
                        out.push(')');
                        if parens {
                            out.push(')');
                        }
                        return;
                    }
                };
                a.print(out, lp);
                out.push_str(sym);
                b.print(out, rp);
            }
            Pow(base, expo) => {
                base.print(out, 3);
                out.push('^');
                // Grammar admits only unsigned exponent literals.
                out.push_str(&format_num(*expo));
            }
            Phi(e) => {
                out.push_str("phi(");
                e.print(out, 0);
                out.push(')');
            }
            Ind(lo, hi) => {
                out.push_str("ind(");
                lo.print(out, 0);
                out.push(',');
                hi.print(out, 0);
                out.push(')');
            }
            Piece(c, t, e) => {
                out.push_str("piece(");
                c.print(out, 0);
                out.push(',');
                t.print(out, 0);
                out.push(',');
                e.print(out, 0);
                out.push(')');
            }
        }
        if parens {
            out.push(')');
        }
    }

    /// Breakpoints of the expression within (lo, hi), used to seed quadrature
    /// panels: indicator/piece bounds when constant, and the jump points of
    /// `phi` for the recognizable argument shapes `c/x` and `c*x`.
    pub fn breakpoints_in(&self, lo: f64, hi: f64, cap: usize, out: &mut Vec<f64>) {
        use DriftExpr::*;
        if out.len() >= cap {
            return;
        }
        match self {
            Const(_) | X => {}
            Phi(e) => {
                phi_jumps(e, lo, hi, cap, out);
                e.breakpoints_in(lo, hi, cap, out);
            }
            Unary(_, e) | Pow(e, _) => e.breakpoints_in(lo, hi, cap, out),
            Binary(_, a, b) => {
                a.breakpoints_in(lo, hi, cap, out);
                b.breakpoints_in(lo, hi, cap, out);
            }
            Ind(l, h) => {
                if let Const(c) = **l {
                    out.push(c);
                }
                if let Const(c) = **h {
                    out.push(c);
                }
                l.breakpoints_in(lo, hi, cap, out);
                h.breakpoints_in(lo, hi, cap, out);
            }
            Piece(c, t, e) => {
                c.breakpoints_in(lo, hi, cap, out);
                t.breakpoints_in(lo, hi, cap, out);
                e.breakpoints_in(lo, hi, cap, out);
            }
        }
    }
}

/// Shortest round-trip decimal form (Rust's Display for f64).
fn format_num(c: f64) -> String {
    format!("{c}")
}

/// Jump points of phi(arg(x)) for arg = c/x or c*x (or plain x): the wave
/// flips whenever the argument crosses an integer.
fn phi_jumps(arg: &DriftExpr, lo: f64, hi: f64, cap: usize, out: &mut Vec<f64>) {
    use DriftExpr::*;
    match arg {
        // arg = c / x: jumps at x = c / n.
        Binary(BinaryOp::Div, num, den) => {
            if let (Const(c), X) = (&**num, &**den) {
                let c = *c;
                if c == 0.0 {
                    return;
                }
                for sgn in [1.0f64, -1.0] {
                    let mut n = 1u64;
                    while out.len() < cap && n < 1_000_000 {
                        let x = sgn * c / n as f64;
                        if x > lo && x < hi {
                            out.push(x);
                        }
                        // Once |x| drops below the representable interest
                        // range relative to the window, stop.
                        if x.abs() < 1e-9 * (hi - lo).abs() {
                            break;
                        }
                        n += 1;
                    }
                }
            }
        }
        // arg = c * x or x * c: jumps at x = n / c.
        Binary(BinaryOp::Mul, a, b) => {
            let c = match (&**a, &**b) {
                (Const(c), X) | (X, Const(c)) => Some(*c),
                _ => None,
            };
            if let Some(c) = c {
                if c != 0.0 {
                    let n_lo = (lo * c).min(hi * c).floor() as i64;
                    let n_hi = (lo * c).max(hi * c).ceil() as i64;
                    if (n_hi - n_lo) as usize <= 4 * cap {
                        for n in n_lo..=n_hi {
                            let x = n as f64 / c;
                            if x > lo && x < hi && out.len() < cap {
                                out.push(x);
                            }
                        }
                    }
                }
            }
        }
        X => {
            let n_lo = lo.floor() as i64;
            let n_hi = hi.ceil() as i64;
            if (n_hi - n_lo) as usize <= 4 * cap {
                for n in n_lo..=n_hi {
                    let x = n as f64;
                    if x > lo && x < hi && out.len() < cap {
                        out.push(x);
                    }
                }
            }
        }
        _ => {}
    }
}
