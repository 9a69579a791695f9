//! Sampled antiderivatives of `1/a` (time scale) and `a` (potential), with
//! monotone piecewise-cubic interpolation, exact local re-quadrature and
//! bracketing inversion.
//!
//! Both sides of the origin are handled on the working axis `u = |x|`:
//! for the left side the drift is reflected (`a~(u) = -a(-u)`), which makes
//! every construction a single increasing-from-zero code path. The stored
//! values are then exactly `A(x) = int_0^x dz/a(z)` and `B(x) = int_0^x a(z) dz`
//! for signed query points `x` on the matching side.

use std::sync::Arc;

use super::quad::{gk15, singular_edge_scan, Verdict};
use crate::error::QuadError;

/// Which side of the origin an antiderivative lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    /// Map a working-axis coordinate u >= 0 to the signed axis.
    pub fn signed(self, u: f64) -> f64 {
        match self {
            Side::Right => u,
            Side::Left => -u,
        }
    }

    /// Map a signed coordinate on this side to the working axis.
    pub fn unsigned(self, x: f64) -> f64 {
        match self {
            Side::Right => x,
            Side::Left => -x,
        }
    }
}

/// Which integral the antiderivative stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntiKind {
    /// A = int 1/a (travel time of the noiseless flow).
    TimeScale,
    /// B = int a, stored without any factor 2; consumers apply 2/eps^2.
    Potential,
}

type F64Fn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Monotone sampled antiderivative on one side of the origin.
pub struct Antiderivative {
    pub side: Side,
    pub kind: AntiKind,
    /// Working-axis sample points, strictly increasing, xs[0] = 0.
    xs: Vec<f64>,
    /// Cumulative values at xs, vals[0] = 0.
    vals: Vec<f64>,
    /// Fritsch-Carlson slopes for monotone cubic interpolation.
    slopes: Vec<f64>,
    /// Integrand on the working axis, for local re-quadrature.
    integrand: F64Fn,
    /// Exact closed form on the working axis, when the drift provides one.
    exact: Option<F64Fn>,
    /// First blocking zero ahead (working axis), if detected.
    pub r_singular: Option<f64>,
    /// A(R) when finite: the plateau onset time of the extremal solution.
    pub t_plateau: Option<f64>,
}

/// How the far end of the working domain is treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndMode {
    /// Regular endpoint: integrand smooth up to `end`.
    Plain,
    /// Integrand singular at `end` but integrable: the terminal gap is
    /// integrated by a geometric edge scan (finite plateau time).
    FinitePlateau,
    /// Integral blows up at `end`: nodes approach it geometrically and the
    /// endpoint itself is excluded.
    Asymptote,
}

impl Antiderivative {
    /// Build from a working-axis integrand over [0, end]. `origin_singular`
    /// integrates the first gap by a geometric edge scan.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn build(
        side: Side,
        kind: AntiKind,
        integrand: F64Fn,
        exact: Option<F64Fn>,
        end: f64,
        origin_singular: bool,
        end_mode: EndMode,
        hints: &[f64],
        tol: f64,
    ) -> Result<Antiderivative, QuadError> {
        assert!(end > 0.0 && end.is_finite());
        let mut xs = node_ladder(end, end_mode);
        xs.extend(hints.iter().copied().filter(|&h| h > 0.0 && h < end));
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() <= f64::EPSILON * end);
        if xs[0] != 0.0 {
            xs.insert(0, 0.0);
        }
        let mut vals = Vec::with_capacity(xs.len());
        vals.push(0.0);
        if let Some(ex) = &exact {
            for &x in &xs[1..] {
                vals.push(ex(x));
            }
        } else {
            let mut acc = 0.0;
            let n = xs.len();
            for i in 1..n {
                let (a, b) = (xs[i - 1], xs[i]);
                let v = if a == 0.0 && origin_singular {
                    let r = singular_edge_scan(&*integrand, 0.0, b, true, tol, hints);
                    if r.verdict == Verdict::Divergent {
                        return Err(QuadError::Divergent);
                    }
                    r.value
                } else if i == n - 1 && end_mode == EndMode::FinitePlateau {
                    let r = singular_edge_scan(&*integrand, b, b - a, false, tol, hints);
                    if r.verdict == Verdict::Divergent {
                        return Err(QuadError::Divergent);
                    }
                    r.value
                } else {
                    let (rough, _) = gk15(&*integrand, a, b);
                    let budget = rough.abs().max(1e-30) * 1e-12 + tol * 1e-3;
                    let (v, _, _) =
                        super::quad::adaptive_capped(&*integrand, a, b, budget, hints, 3000);
                    v
                };
                acc += v;
                vals.push(acc);
            }
        }
        let slopes = pchip_slopes(&xs, &vals);
        Ok(Antiderivative {
            side,
            kind,
            xs,
            vals,
            slopes,
            integrand,
            exact,
            r_singular: None,
            t_plateau: None,
        })
    }

    /// Domain end on the working axis.
    pub fn end(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Value at a signed point on this side (0 <= |x| <= end).
    pub fn value(&self, x: f64) -> f64 {
        self.value_u(self.side.unsigned(x))
    }

    /// Value on the working axis, by exact form or node + local re-quadrature.
    pub fn value_u(&self, u: f64) -> f64 {
        if let Some(ex) = &self.exact {
            return ex(u.clamp(0.0, self.end()));
        }
        let u = u.clamp(0.0, self.end());
        let i = match self.xs.binary_search_by(|p| p.total_cmp(&u)) {
            Ok(i) => return self.vals[i],
            Err(i) => i, // xs[i-1] < u < xs[i]
        };
        let base = self.xs[i - 1];
        if i == 1 && base == 0.0 {
            // Inside the origin gap: re-run the edge scan up to u.
            let r = singular_edge_scan(&*self.integrand, 0.0, u, true, 1e-13, &[]);
            return r.value;
        }
        let (v, _) = gk15(&*self.integrand, base, u);
        if v.is_finite() {
            self.vals[i - 1] + v
        } else {
            // Singular inside the gap (can only happen at the very end).
            self.interp_u(u)
        }
    }

    /// Monotone piecewise-cubic interpolation on the sample grid.
    pub fn interp(&self, x: f64) -> f64 {
        self.interp_u(self.side.unsigned(x))
    }

    fn interp_u(&self, u: f64) -> f64 {
        pchip_eval(&self.xs, &self.vals, &self.slopes, u.clamp(0.0, self.end()))
    }

    /// Range of stored values (min, max).
    pub fn range(&self) -> (f64, f64) {
        let lo = self.vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Sampled grid as signed (x, value) pairs, ordered from the origin out.
    pub fn grid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs
            .iter()
            .zip(&self.vals)
            .map(|(&u, &v)| (self.side.signed(u), v))
    }

    /// Invert a strictly monotone antiderivative: the working-axis u with
    /// value_u(u) = y, to |F(u) - y| <= tol (1 + |y|).
    pub fn invert_u(&self, y: f64, tol: f64) -> Result<f64, QuadError> {
        let n = self.vals.len();
        let ascending = self.vals[n - 1] >= self.vals[0];
        let v0 = if ascending { self.vals[0] } else { self.vals[n - 1] };
        let v1 = if ascending { self.vals[n - 1] } else { self.vals[0] };
        if y < v0 - tol * (1.0 + y.abs()) || y > v1 + tol * (1.0 + y.abs()) {
            return Err(QuadError::OutOfRange {
                y,
                lo: v0,
                hi: v1,
            });
        }
        let yc = y.clamp(v0, v1);
        // Bracket on the sample grid.
        let (mut lo, mut hi) = {
            let idx = if ascending {
                self.vals.partition_point(|&v| v < yc)
            } else {
                self.vals.partition_point(|&v| v > yc)
            };
            let i = idx.clamp(1, n - 1);
            (self.xs[i - 1], self.xs[i])
        };
        let target = tol * (1.0 + y.abs());
        let mut flo = self.value_u(lo) - yc;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.value_u(mid) - yc;
            if fm.abs() <= target {
                return Ok(mid);
            }
            if (fm >= 0.0) == (flo >= 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Invert on the signed axis.
    pub fn invert(&self, y: f64, tol: f64) -> Result<f64, QuadError> {
        Ok(self.side.signed(self.invert_u(y, tol)?))
    }

    pub(crate) fn with_singularity(mut self, r: Option<f64>, t: Option<f64>) -> Self {
        self.r_singular = r;
        self.t_plateau = t;
        self
    }
}

/// Geometric-plus-uniform node ladder on (0, end]: 8 nodes per octave over
/// 52 octaves from the origin, a uniform fill, and (optionally) a geometric
/// approach to the far end for blow-up resolution.
fn node_ladder(end: f64, end_mode: EndMode) -> Vec<f64> {
    let mut xs = Vec::with_capacity(600);
    for j in (0..=52 * 8).rev() {
        let x = end * 0.5f64.powf(j as f64 / 8.0);
        xs.push(x);
    }
    for i in 1..64 {
        xs.push(end * i as f64 / 64.0);
    }
    match end_mode {
        EndMode::Plain => {}
        EndMode::FinitePlateau => {
            for j in 1..=20 {
                xs.push(end * (1.0 - 0.5f64.powf(1.0 + j as f64 / 2.0)));
            }
        }
        EndMode::Asymptote => {
            for j in 1..=41 * 2 {
                xs.push(end * (1.0 - 0.5f64.powf(1.0 + j as f64 / 2.0)));
            }
            // Exclude the endpoint itself.
            xs.retain(|&x| x < end * (1.0 - 1e-13));
        }
    }
    xs.sort_by(f64::total_cmp);
    xs
}

/// Fritsch-Carlson monotone cubic slopes.
pub fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let mut d = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let h = xs[i + 1] - xs[i];
        d.push(if h > 0.0 { (ys[i + 1] - ys[i]) / h } else { 0.0 });
    }
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

/// Cubic Hermite evaluation with the given slopes.
pub fn pchip_eval(xs: &[f64], ys: &[f64], ms: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[n - 1] {
        return ys[n - 1];
    }
    let i = match xs.binary_search_by(|p| p.total_cmp(&x)) {
        Ok(i) => return ys[i],
        Err(i) => i - 1,
    };
    let h = xs[i + 1] - xs[i];
    let t = (x - xs[i]) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    h00 * ys[i] + h10 * h * ms[i] + h01 * ys[i + 1] + h11 * h * ms[i + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build_simple(f: impl Fn(f64) -> f64 + Send + Sync + 'static, end: f64) -> Antiderivative {
        Antiderivative::build(
            Side::Right,
            AntiKind::TimeScale,
            Arc::new(f),
            None,
            end,
            true,
            EndMode::Plain,
            &[],
            1e-12,
        )
        .unwrap()
    }

    #[test]
    fn linear_time_scale_for_constant_drift() {
        // a = c: A(x) = x / c exactly.
        let c = 2.5;
        let a = build_simple(move |_u| 1.0 / c, 1.0);
        for &x in &[0.0, 0.1, 0.37, 0.9, 1.0] {
            assert!((a.value(x) - x / c).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn sqrt_drift_time_scale() {
        // a = x^{1/2}: A(x) = 2 sqrt(x), singular integrand at 0.
        let a = build_simple(|u: f64| u.powf(-0.5), 1.0);
        for &x in &[1e-6f64, 1e-3, 0.04, 0.25, 1.0] {
            let exact = 2.0 * x.sqrt();
            assert!(
                (a.value(x) - exact).abs() < 1e-9 * (1.0 + exact),
                "x = {x}: {} vs {exact}",
                a.value(x)
            );
        }
    }

    #[test]
    fn inversion_round_trip() {
        let a = build_simple(|u: f64| u.powf(-0.5), 1.0);
        // A = 2 sqrt(x): A^{-1}(y) = (y/2)^2; y = 1 -> 0.25.
        let x = a.invert_u(1.0, 1e-12).unwrap();
        assert!((x - 0.25).abs() < 1e-10, "got {x}");
        // Round trip at 100 deterministic pseudo-random points.
        let mut s = 1u64;
        for _ in 0..100 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let x0 = (s >> 11) as f64 / (1u64 << 53) as f64;
            let y = a.value_u(x0);
            let xr = a.invert_u(y, 1e-12).unwrap();
            assert!((a.value_u(xr) - y).abs() <= 1e-12 * (1.0 + y.abs()));
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let a = build_simple(|u: f64| u.powf(-0.5), 1.0);
        assert!(matches!(
            a.invert_u(2.5, 1e-10),
            Err(QuadError::OutOfRange { .. })
        ));
    }

    #[test]
    fn pchip_preserves_monotonicity() {
        let xs: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| x.powf(1.5)).collect();
        let ms = pchip_slopes(&xs, &ys);
        let mut prev = -1.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let v = pchip_eval(&xs, &ys, &ms, x);
            assert!(v >= prev - 1e-14, "not monotone at {x}");
            prev = v;
        }
    }
}
