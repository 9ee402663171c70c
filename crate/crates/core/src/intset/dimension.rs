use alloc::vec::Vec;

use super::{levels_below, pow_u64, IntSet};
use crate::digits::Radix;
use crate::stats;

/// Minimum value of `H^γ_{≥1}(A ∩ [0,r^N)) / r^{Nγ}` that still counts as
/// "bounded below".
pub const RATIO_FLOOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DimensionKind {
    Mass,
    DiscreteHausdorff,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Level {
    pub n: u32,
    /// `|A ∩ [0, r^N)|`.
    pub count: u64,
    /// Mass: `log_r count / N`. Hausdorff: the largest `γ` whose content ratio
    /// at this level is at least [`RATIO_FLOOR`].
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionEstimate {
    pub kind: DimensionKind,
    pub levels: Vec<Level>,
    /// Mass: least-squares slope of `log_r count` against `N` over the top
    /// half of levels. Hausdorff: the per-level thresholds extrapolated to
    /// `N → ∞` along `1/N`.
    pub estimate: f64,
    /// Mass: the log-ratio at the top level. Hausdorff: the smallest per-level
    /// threshold over the top half (the plain "stays above the floor" rule).
    pub raw: f64,
}

fn top<T>(v: &[T]) -> &[T] {
    &v[stats::top_half_start(v.len())..]
}

pub fn mass_dimension(a: &IntSet, r: Radix) -> DimensionEstimate {
    let n_max = levels_below(r, a.bound());
    let ln_r = libm::log(r.get() as f64);
    let mut levels = Vec::new();
    for n in 1..=n_max {
        let Some(p) = pow_u64(r, n) else { break };
        let count = a.count_below(p) as u64;
        let value = if count == 0 { 0.0 } else { libm::log(count as f64) / ln_r / n as f64 };
        levels.push(Level { n, count, value });
    }
    if a.is_empty() || levels.is_empty() {
        return DimensionEstimate { kind: DimensionKind::Mass, estimate: 0.0, raw: 0.0, levels };
    }
    let t = top(&levels);
    let xs: Vec<f64> = t.iter().map(|l| l.n as f64).collect();
    let ys: Vec<f64> = t.iter().map(|l| l.value * l.n as f64).collect();
    let raw = levels.last().map(|l| l.value).unwrap_or(0.0);
    let estimate = stats::least_squares(&xs, &ys).map(|(s, _)| s).unwrap_or(raw);
    DimensionEstimate { kind: DimensionKind::Mass, levels, estimate, raw }
}

/// `min(cap, H^γ_{≥1}(xs))` for sorted integers, in integer units.
///
/// Same recurrence as the real-line cover DP, with `max(d,1)^γ` read from a
/// table up to the span where one interval alone already reaches `cap`.
pub(crate) fn lattice_cover_cost(xs: &[u64], gamma: f64, cap: f64) -> f64 {
    let Some((&first, &last)) = xs.first().zip(xs.last()) else {
        return 0.0;
    };
    let reach = libm::pow(cap, 1.0 / gamma);
    let table_len = ((last - first) as f64).min(libm::ceil(reach)) as usize + 2;
    let table: Vec<f64> = (0..table_len).map(|d| libm::pow(d.max(1) as f64, gamma)).collect();
    let mut best = Vec::with_capacity(xs.len() + 1);
    best.push(0.0f64);
    for (j, &xj) in xs.iter().enumerate() {
        let mut cur = cap;
        for i in (0..=j).rev() {
            let d = (xj - xs[i]) as usize;
            let Some(&t) = table.get(d) else { break };
            if t >= cur {
                break;
            }
            let c = best[i] + t;
            if c < cur {
                cur = c;
            }
        }
        best.push(cur);
    }
    best[xs.len()]
}

/// Largest `γ ∈ [0,1]` with `H^γ_{≥1}(xs) / scale^γ ≥ floor`.
///
/// Every cover term `max(δ,1)^γ / scale^γ` has `δ ≤ scale`, so the ratio is
/// non-increasing in `γ` and bisection applies.
pub(crate) fn threshold_gamma(xs: &[u64], scale: f64, floor: f64) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let holds = |g: f64| {
        let cap = floor * libm::pow(scale, g);
        lattice_cover_cost(xs, g, cap) >= cap
    };
    if holds(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..24 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Discrete Hausdorff dimension estimate over the windows `[0, r^N)`.
///
/// The plain threshold at level `N` sits below the limit by roughly
/// `log_r(1/floor)/N`, since a `γ`-dimensional set has content ratio of order
/// `r^{-N(γ*−γ)}` near the threshold. The estimate removes that bias by fitting
/// the per-level thresholds against `1/N` and reading off the intercept.
/// Levels with more than `max_points` elements are skipped.
pub fn hausdorff_dimension(a: &IntSet, r: Radix, max_points: usize) -> DimensionEstimate {
    let n_max = levels_below(r, a.bound());
    let mut levels = Vec::new();
    for n in 1..=n_max {
        let Some(p) = pow_u64(r, n) else { break };
        let k = a.count_below(p);
        if k > max_points {
            break;
        }
        let value = threshold_gamma(&a.elements()[..k], p as f64, RATIO_FLOOR);
        levels.push(Level { n, count: k as u64, value });
    }
    if a.is_empty() || levels.is_empty() {
        return DimensionEstimate { kind: DimensionKind::DiscreteHausdorff, estimate: 0.0, raw: 0.0, levels };
    }
    let t = top(&levels);
    let raw = t.iter().map(|l| l.value).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = t.iter().map(|l| 1.0 / l.n as f64).collect();
    let ys: Vec<f64> = t.iter().map(|l| l.value).collect();
    let estimate = match stats::least_squares(&xs, &ys) {
        Some((_, intercept)) => intercept.clamp(0.0, 1.0),
        None => raw,
    };
    DimensionEstimate { kind: DimensionKind::DiscreteHausdorff, levels, estimate, raw }
}
