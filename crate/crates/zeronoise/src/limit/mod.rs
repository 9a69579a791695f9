//! The analytic pipeline: scale function, exit probabilities and times,
//! Green kernel, interval weights and their zero-noise limits.

pub mod approx;
pub mod exit;
pub mod scale;
pub mod weight;

pub use approx::{approx_identity, ApproxIdentity, KernelSide};
pub use exit::{expected_exit_time, green_mass_integral};
pub use scale::{exit_probability, green_function, scale_function, weight_p_eps, ScaleEval};
pub use weight::{limit_weight, limit_weight_regvar, mu_function, LadderOpts, LimitWeight, PMethod, RegvarKind};

use crate::drift::{Drift, Regime, SignClassification};
use crate::error::LimitError;
use crate::solver::{extremal_solution, ExtremalSolution, SolutionSide};

/// The zero-noise limit law: mass p on the right extremal solution and 1-p on
/// the left one.
#[derive(Debug, Clone)]
pub struct LimitLaw {
    pub p: f64,
    pub psi_minus: ExtremalSolution,
    pub psi_plus: ExtremalSolution,
    pub method: PMethod,
}

/// Everything the analysis pipeline produces for one drift.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub classification: SignClassification,
    /// Present when the regime admits a limit law and the weight converged.
    pub law: Option<LimitLaw>,
    /// (eps, p_eps) over the requested ladder (repulsive sign pattern only).
    pub p_eps_trace: Vec<(f64, f64)>,
    /// (u_j, r_j) of the mu-derivative ladder.
    pub mu_prime_trace: Vec<(f64, f64)>,
    /// (eps, expected exit time from 0 on (alpha, beta)).
    pub exit_times: Vec<(f64, f64)>,
    /// True when p_eps has no single limit: the trace is the result.
    pub non_convergent: bool,
    pub diagnostics: String,
}

/// Analysis options: interval, horizon, ladders.
#[derive(Debug, Clone)]
pub struct AnalyzeOpts {
    pub alpha: f64,
    pub beta: f64,
    pub t_final: f64,
    pub eps_ladder: Vec<f64>,
    pub tol: f64,
}

impl AnalyzeOpts {
    pub fn for_drift(drift: &Drift) -> AnalyzeOpts {
        let (lo, hi) = drift.window();
        AnalyzeOpts {
            alpha: lo.max(-1.0),
            beta: hi.min(1.0),
            t_final: 0.5,
            eps_ladder: (0..=16).map(|i| 0.5f64.powi(i)).collect(),
            tol: 1e-10,
        }
    }
}

/// Run the full analytic pipeline for one drift.
///
/// Unsupported regimes still produce the classification and whatever traces
/// are computable; `law` is `None` there and the caller decides how to
/// report it.
pub fn analyze(drift: &Drift, opts: &AnalyzeOpts) -> Result<Analysis, LimitError> {
    let cls = drift.classification().clone();
    let mut diagnostics = String::new();
    let mut p_eps_trace = Vec::new();
    let mut exit_times = Vec::new();
    if cls.repulsive_sign_pattern() {
        for &eps in &opts.eps_ladder {
            if let Ok(p) = weight_p_eps(drift, eps, opts.alpha, opts.beta) {
                p_eps_trace.push((eps, p));
            }
        }
    }
    for &eps in opts.eps_ladder.iter().take(7) {
        match expected_exit_time(drift, eps, 0.0, opts.alpha, opts.beta, opts.tol) {
            Ok(u) => exit_times.push((eps, u)),
            Err(e) => {
                diagnostics.push_str(&format!("exit time at eps={eps}: {e}; "));
                break;
            }
        }
    }

    match cls.regime {
        Regime::Repulsive => {
            let w = limit_weight(drift, &LadderOpts::for_drift(drift))?;
            let mu_prime_trace = w.trace.clone();
            match w.p {
                Some(p) => {
                    let psi_plus =
                        extremal_solution(drift, SolutionSide::Plus, opts.t_final, None)?;
                    let psi_minus =
                        extremal_solution(drift, SolutionSide::Minus, opts.t_final, None)?;
                    Ok(Analysis {
                        classification: cls,
                        law: Some(LimitLaw {
                            p,
                            psi_minus,
                            psi_plus,
                            method: w.method,
                        }),
                        p_eps_trace,
                        mu_prime_trace,
                        exit_times,
                        non_convergent: false,
                        diagnostics,
                    })
                }
                None => Ok(Analysis {
                    classification: cls,
                    law: None,
                    p_eps_trace,
                    mu_prime_trace,
                    exit_times,
                    non_convergent: true,
                    diagnostics: format!("{diagnostics}{}", w.diagnostics),
                }),
            }
        }
        Regime::PositiveDrift => {
            let psi_plus = extremal_solution(drift, SolutionSide::Plus, opts.t_final, None)?;
            // The limit measure is a single atom at psi_+; the left slot
            // carries the same solution so the pair always brackets the law.
            Ok(Analysis {
                classification: cls,
                law: Some(LimitLaw {
                    p: 1.0,
                    psi_minus: psi_plus.clone(),
                    psi_plus,
                    method: PMethod::Symmetric,
                }),
                p_eps_trace,
                mu_prime_trace: Vec::new(),
                exit_times,
                non_convergent: false,
                diagnostics,
            })
        }
        Regime::NegativeDrift => {
            let psi_minus = extremal_solution(drift, SolutionSide::Minus, opts.t_final, None)?;
            Ok(Analysis {
                classification: cls,
                law: Some(LimitLaw {
                    p: 0.0,
                    psi_minus: psi_minus.clone(),
                    psi_plus: psi_minus,
                    method: PMethod::Symmetric,
                }),
                p_eps_trace,
                mu_prime_trace: Vec::new(),
                exit_times,
                non_convergent: false,
                diagnostics,
            })
        }
        Regime::Unsupported => Ok(Analysis {
            classification: cls,
            law: None,
            p_eps_trace,
            mu_prime_trace: Vec::new(),
            exit_times,
            non_convergent: false,
            diagnostics: format!(
                "{diagnostics}no limit theorem covers this sign/integrability pattern"
            ),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::Drift;

    #[test]
    fn analyze_oscillating_repulsive() {
        // The canonical oscillating text promotes to the exact built-in.
        let drift =
            Drift::from_expr_text_promoted("sign(x)*abs(x)^0.5*(1+0.5*phi(1/x))", (-2.0, 2.0))
                .unwrap();
        assert!(drift.describe().starts_with("example1"), "not promoted");
        let a = analyze(&drift, &AnalyzeOpts::for_drift(&drift)).unwrap();
        let law = a.law.expect("repulsive law");
        assert!((law.p - 0.5).abs() < 1e-3, "p = {}", law.p);
        assert!(!a.p_eps_trace.is_empty());
        // p_eps itself hovers at 1/2 for the odd-phase oscillation.
        for &(eps, p) in &a.p_eps_trace {
            assert!((p - 0.5).abs() < 0.05, "eps={eps}: {p}");
        }
    }

    #[test]
    fn analyze_positive_drift() {
        let drift = Drift::from_expr_text("1", (-2.0, 2.0)).unwrap();
        let a = analyze(&drift, &AnalyzeOpts::for_drift(&drift)).unwrap();
        let law = a.law.expect("positive-drift law");
        assert_eq!(law.p, 1.0);
        // psi_+(t) = t.
        assert!((law.psi_plus.eval(0.4) - 0.4).abs() < 1e-9);
    }

    #[test]
    fn analyze_unsupported_linear() {
        let drift = Drift::from_expr_text("x", (-2.0, 2.0)).unwrap();
        let a = analyze(&drift, &AnalyzeOpts::for_drift(&drift)).unwrap();
        assert!(a.law.is_none());
        assert_eq!(a.classification.regime, crate::drift::Regime::Unsupported);
    }
}
