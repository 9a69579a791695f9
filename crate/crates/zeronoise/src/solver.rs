//! Extremal solutions of the noiseless equation `dX/dt = a(X)`, `X(0) = 0`.
//!
//! The right-going solution is `psi_+(t) = A^{-1}(t)` with `A = int_0^x 1/a`;
//! it plateaus at the first blocking zero `R` once `t >= A(R)`. The
//! left-going solution is produced by reflection (`a~(x) = -a(-x)`), so both
//! sides share one code path.

use crate::calculus::{self, Antiderivative, Side};
use crate::drift::{Drift, SideSign};
use crate::error::{LimitError, QuadError};

/// Which extremal solution: `Plus` goes right, `Minus` goes left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionSide {
    Plus,
    Minus,
}

impl SolutionSide {
    fn calc_side(self) -> Side {
        match self {
            SolutionSide::Plus => Side::Right,
            SolutionSide::Minus => Side::Left,
        }
    }
}

/// An extremal solution sampled on a time grid.
#[derive(Debug, Clone)]
pub struct ExtremalSolution {
    pub side: SolutionSide,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Signed singular point R (first blocking zero of the drift), if any.
    pub singular_point: Option<f64>,
    /// Plateau onset time t = A(R) when finite.
    pub plateau_time: Option<f64>,
    /// True when the reciprocal integral diverges at 0 on this side (or the
    /// drift vanishes there): the only solution from 0 is identically 0.
    pub zero_solution: bool,
    /// max |A(psi(t)) - t| over the pre-plateau grid.
    pub max_residual: f64,
    slopes: Vec<f64>,
}

impl ExtremalSolution {
    /// Interpolated value at time t (clamped to the grid span).
    pub fn eval(&self, t: f64) -> f64 {
        if self.zero_solution {
            return 0.0;
        }
        if let Some(tp) = self.plateau_time {
            if t >= tp {
                return self.values[self.values.len() - 1];
            }
        }
        calculus::anti::pchip_eval(&self.times, &self.values, &self.slopes, t)
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// (t, psi) pairs for serialization.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

/// Default time grid: geometric from 1e-8 T (the solution has zero or
/// infinite slope at 0, geometric nodes resolve it) followed by a uniform
/// sweep to T.
pub fn default_time_grid(t_final: f64) -> Vec<f64> {
    let mut ts = vec![0.0];
    let t0 = 1e-8 * t_final;
    let geo_steps = 48;
    for k in 0..=geo_steps {
        ts.push(t0 * (t_final / t0).powf(k as f64 / geo_steps as f64));
    }
    for i in 1..=200 {
        ts.push(t_final * i as f64 / 200.0);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b) <= f64::EPSILON * t_final);
    ts
}

/// Construct the extremal solution on `[0, t_final]`.
///
/// If the one-sided reciprocal integral diverges at the origin (or the drift
/// vanishes on the whole side), the unique solution starting at 0 on that
/// side is the constant 0, returned with `zero_solution` set.
pub fn extremal_solution(
    drift: &Drift,
    side: SolutionSide,
    t_final: f64,
    grid: Option<&[f64]>,
) -> Result<ExtremalSolution, LimitError> {
    let times: Vec<f64> = match grid {
        Some(g) => {
            let mut ts: Vec<f64> = g.to_vec();
            ts.sort_by(f64::total_cmp);
            ts
        }
        None => default_time_grid(t_final),
    };
    let zero = |times: &[f64]| ExtremalSolution {
        side,
        values: vec![0.0; times.len()],
        singular_point: None,
        plateau_time: None,
        zero_solution: true,
        max_residual: 0.0,
        slopes: vec![0.0; times.len()],
        times: times.to_vec(),
    };

    let (lo, hi) = drift.window();
    let reach = match side {
        SolutionSide::Plus => hi,
        SolutionSide::Minus => -lo,
    };
    if reach <= 0.0 {
        return Err(LimitError::PointOutsideInterval { x: 0.0, lo, hi });
    }
    if side_probe_sign(drift, side, reach) == SideSign::Zero {
        return Ok(zero(&times));
    }

    let anti = match calculus::antiderivative_a(drift, side.calc_side(), reach, 1e-12) {
        Ok(a) => a,
        Err(QuadError::Divergent) => return Ok(zero(&times)),
        Err(e) => return Err(LimitError::Quad(e)),
    };
    build_from_anti(side, &anti, times)
}

fn side_probe_sign(drift: &Drift, side: SolutionSide, reach: f64) -> SideSign {
    let sgn = match side {
        SolutionSide::Plus => 1.0,
        SolutionSide::Minus => -1.0,
    };
    let tiny = 1e-12 * drift.sup_bound().max(1.0);
    let mut pos = false;
    let mut neg = false;
    let mut probe = |x: f64| {
        // Outward component: positive means the side admits outward motion.
        let v = drift.eval_sim(x) * sgn;
        if v > tiny {
            pos = true;
        } else if v < -tiny {
            neg = true;
        }
    };
    for j in 0..=60 {
        probe(sgn * reach * 0.5f64.powi(j));
    }
    for i in 1..=512 {
        probe(sgn * reach * i as f64 / 512.0);
    }
    match (pos, neg) {
        (true, false) => SideSign::Positive,
        (false, true) => SideSign::Negative,
        (false, false) => SideSign::Zero,
        (true, true) => SideSign::Mixed,
    }
}

fn build_from_anti(
    side: SolutionSide,
    anti: &Antiderivative,
    times: Vec<f64>,
) -> Result<ExtremalSolution, LimitError> {
    let r_signed = anti.r_singular.map(|u| anti.side.signed(u));
    let plateau_time = anti.t_plateau;
    let a_max = anti.range().1;
    let mut values = Vec::with_capacity(times.len());
    let mut max_residual: f64 = 0.0;
    for &t in &times {
        if t <= 0.0 {
            values.push(0.0);
            continue;
        }
        if let Some(tp) = plateau_time {
            if t >= tp {
                values.push(anti.side.signed(anti.end()));
                continue;
            }
        }
        if t >= a_max {
            // Asymptotic approach to the singular point: clamp to the domain
            // end (A(R) lies beyond the horizon).
            values.push(anti.side.signed(anti.end()));
            continue;
        }
        let u = anti.invert_u(t, 1e-12).map_err(LimitError::Quad)?;
        let resid = (anti.value_u(u) - t).abs();
        max_residual = max_residual.max(resid);
        values.push(anti.side.signed(u));
    }
    let slopes = calculus::anti::pchip_slopes(&times, &values);
    Ok(ExtremalSolution {
        side,
        times,
        values,
        singular_point: r_signed,
        plateau_time,
        zero_solution: false,
        max_residual,
        slopes,
    })
}

/// Weighted defect of the solution against the field: max over interior grid
/// points (plateau and t = 0 excluded) of
/// `|finite-difference slope - a(psi)| / (1 + |a(psi)|)`.
pub fn residual(drift: &Drift, sol: &ExtremalSolution) -> f64 {
    if sol.zero_solution {
        return 0.0;
    }
    let n = sol.times.len();
    let mut worst: f64 = 0.0;
    for k in 1..n - 1 {
        let (t0, t1, t2) = (sol.times[k - 1], sol.times[k], sol.times[k + 1]);
        let _ = t1;
        if let Some(tp) = sol.plateau_time {
            if t2 >= tp {
                continue;
            }
        }
        if t0 <= 0.0 {
            continue;
        }
        let slope = (sol.values[k + 1] - sol.values[k - 1]) / (t2 - t0);
        let a = drift.eval_sim(sol.values[k]);
        let w = (slope - a).abs() / (1.0 + a.abs());
        worst = worst.max(w);
    }
    worst
}
