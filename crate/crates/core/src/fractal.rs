//! Discrete fractal geometry on finite sets of exact rationals in `[0,1]`.
//!
//! Covers are by closed intervals. The infimum over open balls is the same on
//! finite sets, since a closed cover inflates by an arbitrarily small amount.

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::digits::Radix;
use crate::interval::Interval;
use crate::subshift::Subshift;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FractalError {
    OutOfUnitInterval,
    Empty,
}

impl fmt::Display for FractalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FractalError::OutOfUnitInterval => write!(f, "point outside [0, 1]"),
            FractalError::Empty => write!(f, "point set is empty"),
        }
    }
}

fn in_unit(x: &BigRational) -> bool {
    !x.is_negative() && *x <= BigRational::one()
}

pub fn rational(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Sorted, duplicate-free subset of `[0,1] ∩ ℚ`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PointSet1D {
    points: Vec<BigRational>,
}

impl PointSet1D {
    pub fn new(mut points: Vec<BigRational>) -> Result<PointSet1D, FractalError> {
        if !points.iter().all(in_unit) {
            return Err(FractalError::OutOfUnitInterval);
        }
        points.sort();
        points.dedup();
        Ok(PointSet1D { points })
    }

    /// Caller guarantees sorted, distinct, inside `[0,1]`.
    pub fn from_sorted(points: Vec<BigRational>) -> PointSet1D {
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(points.iter().all(in_unit));
        PointSet1D { points }
    }

    pub fn points(&self) -> &[BigRational] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.points.iter().map(to_f64).collect()
    }

    pub fn diameter(&self) -> BigRational {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b - a,
            _ => BigRational::zero(),
        }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.points.binary_search(x).is_ok()
    }

    /// Image under `T_r x = r·x mod 1`.
    pub fn times_r_mod_one(&self, r: Radix) -> PointSet1D {
        let rr = BigRational::from_integer(BigInt::from(r.get()));
        let pts: Vec<BigRational> = self.points.iter().map(|x| (x * &rr).fract()).collect();
        PointSet1D::new(pts).expect("fractional parts lie in [0,1)")
    }

    /// Points of `[0,1]²` formed as `self × other`.
    pub fn product(&self, other: &PointSet1D) -> PointSet2D {
        let mut pts = Vec::with_capacity(self.len() * other.len());
        for x in &self.points {
            for y in &other.points {
                pts.push((x.clone(), y.clone()));
            }
        }
        PointSet2D { points: pts }
    }
}

/// Duplicate-free subset of `[0,1]² ∩ ℚ²`, sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PointSet2D {
    points: Vec<(BigRational, BigRational)>,
}

impl PointSet2D {
    pub fn new(mut points: Vec<(BigRational, BigRational)>) -> Result<PointSet2D, FractalError> {
        if !points.iter().all(|(x, y)| in_unit(x) && in_unit(y)) {
            return Err(FractalError::OutOfUnitInterval);
        }
        points.sort();
        points.dedup();
        Ok(PointSet2D { points })
    }

    pub fn points(&self) -> &[(BigRational, BigRational)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Largest `ρ`-separated subset of a sorted set.
///
/// Left-to-right greedy is optimal: given any separated subset, replacing its
/// first point by the set's first point keeps it separated, and induction on
/// the remainder to the right of `x_1 + ρ` does the rest.
pub fn metric_entropy(p: &PointSet1D, rho: &BigRational) -> usize {
    let mut count = 0;
    let mut last: Option<&BigRational> = None;
    for x in &p.points {
        if last.is_none_or(|l| x - l >= *rho) {
            count += 1;
            last = Some(x);
        }
    }
    count
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Packing {
    pub size: usize,
    /// Always true in 2-D: the greedy packing is maximal, not maximum.
    pub lower_bound: bool,
}

/// Greedy maximal `ρ`-separated subset in the Euclidean metric. Its size is
/// within the planar packing constant of the true metric entropy.
pub fn metric_entropy_2d(p: &PointSet2D, rho: &BigRational) -> Packing {
    let rho2 = rho * rho;
    let mut chosen: Vec<&(BigRational, BigRational)> = Vec::new();
    for q in &p.points {
        let far = chosen.iter().all(|c| {
            let dx = &q.0 - &c.0;
            let dy = &q.1 - &c.1;
            &dx * &dx + &dy * &dy >= rho2
        });
        if far {
            chosen.push(q);
        }
    }
    Packing { size: chosen.len(), lower_bound: true }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverInterval {
    pub center: BigRational,
    pub diameter: BigRational,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverSolution {
    pub value: f64,
    /// Enclosure of `Σ δᵢ^γ` for the witness, evaluated with outward rounding.
    pub certified: Interval,
    pub intervals: Vec<CoverInterval>,
}

#[inline]
fn term(d: f64, rho: f64, gamma: f64) -> f64 {
    libm::pow(if d > rho { d } else { rho }, gamma)
}

/// Optimal cost `H^γ_{≥ρ}` of a sorted point list, with an optional cap:
/// the result is `min(true cost, cap)`, which lets the inner loop stop as
/// soon as one interval alone reaches the cap.
///
/// An optimal cover can be taken to cover consecutive runs, each by one
/// interval from its first to its last point (padded to length `ρ`). So the
/// cost satisfies `best[j+1] = min_i best[i] + max(x_j − x_i, ρ)^γ`.
pub fn cover_cost_capped(points: &[f64], rho: f64, gamma: f64, cap: f64) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let mut best = Vec::with_capacity(n + 1);
    best.push(0.0f64);
    for j in 0..n {
        let xj = points[j];
        let mut cur = cap;
        // cur^{1/γ} bounds the useful span: a single interval longer than
        // that already costs at least cur.
        let mut reach = libm::pow(cur, 1.0 / gamma);
        let mut i = j + 1;
        while i > 0 {
            i -= 1;
            let d = xj - points[i];
            if d.max(rho) >= reach {
                break;
            }
            let c = best[i] + term(d, rho, gamma);
            if c < cur {
                cur = c;
                reach = libm::pow(cur, 1.0 / gamma);
            }
        }
        best.push(cur);
    }
    best[n]
}

pub fn cover_cost_sorted(points: &[f64], rho: f64, gamma: f64) -> f64 {
    cover_cost_capped(points, rho, gamma, f64::INFINITY)
}

/// Exact `H^γ_{≥ρ}(P)` over interval covers, with an optimal witness.
pub fn content_1d(p: &PointSet1D, rho: &BigRational, gamma: f64) -> CoverSolution {
    let n = p.len();
    let rho_f = to_f64(rho);
    if n == 0 {
        return CoverSolution { value: 0.0, certified: Interval::point(0.0), intervals: Vec::new() };
    }
    // Differences are taken exactly, then rounded once.
    let gaps_from = |i: usize, j: usize| to_f64(&(&p.points[j] - &p.points[i]));
    let mut best = Vec::with_capacity(n + 1);
    let mut from = Vec::with_capacity(n);
    best.push(0.0f64);
    for j in 0..n {
        let mut cur = f64::INFINITY;
        let mut arg = j;
        for i in (0..=j).rev() {
            let d = gaps_from(i, j);
            let t = term(d, rho_f, gamma);
            if t >= cur {
                break;
            }
            let c = best[i] + t;
            if c < cur {
                cur = c;
                arg = i;
            }
        }
        best.push(cur);
        from.push(arg);
    }
    let mut intervals = Vec::new();
    let mut certified = Interval::point(0.0);
    let rho_i = rational_interval(rho);
    let two = BigRational::from_integer(BigInt::from(2));
    let mut j = n;
    while j > 0 {
        let i = from[j - 1];
        let (a, b) = (&p.points[i], &p.points[j - 1]);
        let span = b - a;
        let (diameter, diam_i) = if span >= *rho { (span.clone(), rational_interval(&span)) } else { (rho.clone(), rho_i) };
        certified = certified + diam_i.powf(gamma);
        intervals.push(CoverInterval { center: (a + b) / &two, diameter });
        j = i;
    }
    intervals.reverse();
    CoverSolution { value: best[n], certified, intervals }
}

fn rational_interval(x: &BigRational) -> Interval {
    let v = to_f64(x);
    Interval::point(v).widen_ulps(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WitnessBall {
    pub lo: BigRational,
    pub diameter: BigRational,
    pub count: usize,
    /// `c (δ/ρ)^γ`, the allowance this ball is measured against.
    pub allowed: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RhoGammaCheck {
    pub holds: bool,
    pub separated: bool,
    /// Ball with the largest `count / (δ/ρ)^γ` among those tested.
    pub worst: Option<WitnessBall>,
}

/// Checks that `P` is `ρ`-separated and that every interval `[x, x+δ]` with
/// `x ∈ P` and `δ = 2^k ρ ≤ max(diam P, ρ)` holds at most `c(δ/ρ)^γ` points.
///
/// An arbitrary ball of diameter `δ' ∈ [2^k ρ, 2^{k+1} ρ)` meeting `P` sits in
/// `[x, x+2^{k+1}ρ]` for its leftmost point `x`, so passing here certifies the
/// full condition with `c` replaced by `2^γ c`.
pub fn is_rho_gamma_c_set(p: &PointSet1D, rho: &BigRational, gamma: f64, c: f64) -> RhoGammaCheck {
    let pts = &p.points;
    let separated = pts.windows(2).all(|w| &w[1] - &w[0] >= *rho);
    let diam = p.diameter();
    let mut worst: Option<(f64, WitnessBall)> = None;
    let mut ok = true;
    let mut delta = rho.clone();
    let mut k = 0i32;
    loop {
        let allowed = c * libm::exp2(k as f64 * gamma);
        let mut hi = 0usize;
        for (lo, x) in pts.iter().enumerate() {
            let end = x + &delta;
            if hi < lo {
                hi = lo;
            }
            while hi < pts.len() && pts[hi] <= end {
                hi += 1;
            }
            let count = hi - lo;
            let ratio = count as f64 / libm::exp2(k as f64 * gamma);
            if count as f64 > allowed {
                ok = false;
            }
            if worst.as_ref().is_none_or(|(w, _)| ratio > *w) {
                worst = Some((ratio, WitnessBall { lo: x.clone(), diameter: delta.clone(), count, allowed }));
            }
        }
        if delta >= diam {
            break;
        }
        delta = &delta * BigRational::from_integer(BigInt::from(2));
        k += 1;
    }
    RhoGammaCheck { holds: ok && separated, separated, worst: worst.map(|(_, w)| w) }
}

/// `max(sup_p d(p, Q), sup_q d(q, P))`, exactly.
pub fn hausdorff_distance(p: &PointSet1D, q: &PointSet1D) -> Result<BigRational, FractalError> {
    if p.is_empty() || q.is_empty() {
        return Err(FractalError::Empty);
    }
    Ok(directed(p, q).max(directed(q, p)))
}

fn directed(p: &PointSet1D, q: &PointSet1D) -> BigRational {
    let qs = &q.points;
    let mut worst = BigRational::zero();
    for x in &p.points {
        let k = qs.partition_point(|y| y < x);
        let mut d: Option<BigRational> = None;
        if k < qs.len() {
            d = Some(&qs[k] - x);
        }
        if k > 0 {
            let e = x - &qs[k - 1];
            d = Some(match d {
                Some(v) if v.cmp(&e) == Ordering::Less => v,
                _ => e,
            });
        }
        let d = d.expect("q is non-empty");
        if d > worst {
            worst = d;
        }
    }
    worst
}

/// `X_n = {0.w₁…w_n : w ∈ L_n(Σ)}`, the shift's set rounded down to `r^{-n}ℤ`.
pub fn approximate(sigma: &Subshift, n: usize) -> PointSet1D {
    let r = sigma.radix();
    let den = BigInt::from(r.get()).pow(n as u32);
    let pts: Vec<BigRational> = sigma
        .words(n)
        .into_iter()
        .map(|w| {
            let v = w.iter().fold(BigInt::zero(), |acc, &d| acc * r.get() + d);
            BigRational::new(v, den.clone())
        })
        .collect();
    // words come out in lexicographic order, which is numeric order here
    PointSet1D::from_sorted(pts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::rescale;
    use crate::subshift::{full_shift, golden_mean};
    use proptest::prelude::*;

    fn set(xs: &[(i64, i64)]) -> PointSet1D {
        PointSet1D::new(xs.iter().map(|&(p, q)| rational(p, q)).collect()).unwrap()
    }

    /// Minimum over all ways to split the sorted points into consecutive runs.
    fn partition_oracle(x: &[f64], rho: f64, gamma: f64) -> f64 {
        let n = x.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << (n - 1)) {
            let mut cost = 0.0;
            let mut start = 0;
            for i in 0..n {
                if i == n - 1 || mask >> i & 1 == 1 {
                    cost += term(x[i] - x[start], rho, gamma);
                    start = i + 1;
                }
            }
            best = best.min(cost);
        }
        best
    }

    /// Exhaustive over all set partitions: each block covered by its hull.
    fn set_partition_oracle(x: &[f64], rho: f64, gamma: f64) -> f64 {
        fn go(x: &[f64], i: usize, blocks: &mut Vec<(f64, f64)>, rho: f64, gamma: f64, best: &mut f64) {
            if i == x.len() {
                let c: f64 = blocks.iter().map(|&(a, b)| term(b - a, rho, gamma)).sum();
                *best = best.min(c);
                return;
            }
            for k in 0..blocks.len() {
                let old = blocks[k];
                blocks[k] = (old.0.min(x[i]), old.1.max(x[i]));
                go(x, i + 1, blocks, rho, gamma, best);
                blocks[k] = old;
            }
            blocks.push((x[i], x[i]));
            go(x, i + 1, blocks, rho, gamma, best);
            blocks.pop();
        }
        let mut best = f64::INFINITY;
        go(x, 0, &mut Vec::new(), rho, gamma, &mut best);
        best
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(metric_entropy(&set(&[(0, 1), (3, 10), (9, 10)]), &rational(1, 2)), 2);
        let ap = set(&(0..8).map(|i| (i, 8)).collect::<Vec<_>>());
        assert_eq!(metric_entropy(&ap, &rational(1, 8)), 8);
        let g = golden_mean().embed(1 << 10);
        let p = rescale(&g, 1 << 10).unwrap();
        // 144 = F(12) binary words of length 10 with no two adjacent 1s
        assert_eq!(metric_entropy(&p, &rational(1, 1 << 10)), g.len());
        assert_eq!(g.len(), 144);
    }

    #[test]
    fn entropy_matches_subset_search() {
        let pts = set(&[(0, 1), (1, 7), (2, 7), (3, 10), (1, 2), (4, 7), (5, 6), (1, 1)]);
        let rho = rational(1, 5);
        let mut best = 0;
        for mask in 0u32..(1 << pts.len()) {
            let chosen: Vec<&BigRational> = (0..pts.len()).filter(|&i| mask >> i & 1 == 1).map(|i| &pts.points()[i]).collect();
            if chosen.windows(2).all(|w| w[1] - w[0] >= rho) {
                best = best.max(chosen.len());
            }
        }
        assert_eq!(metric_entropy(&pts, &rho), best);
    }

    #[test]
    fn content_examples() {
        let s = content_1d(&set(&[(0, 1), (1, 1)]), &rational(1, 10), 0.5);
        assert!((s.value - 2.0 * libm::sqrt(0.1)).abs() < 1e-12);
        assert_eq!(s.intervals.len(), 2);
        assert!(s.certified.contains(s.value));
        let n = 20;
        let lattice = set(&(0..n).map(|i| (i, n - 1)).collect::<Vec<_>>());
        for gamma in [0.3, 0.7, 1.0] {
            assert!(content_1d(&lattice, &rational(1, n), gamma).value <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn witness_covers() {
        let pts = set(&[(0, 1), (1, 50), (1, 3), (7, 20), (2, 3), (99, 100)]);
        let rho = rational(1, 40);
        let s = content_1d(&pts, &rho, 0.6);
        for x in pts.points() {
            let covered = s.intervals.iter().any(|iv| {
                let half = &iv.diameter / rational(2, 1);
                &iv.center - &half <= *x && *x <= &iv.center + &half
            });
            assert!(covered);
        }
        assert!(s.intervals.iter().all(|iv| iv.diameter >= rho));
        let total: f64 = s.intervals.iter().map(|iv| libm::pow(to_f64(&iv.diameter), 0.6)).sum();
        assert!((total - s.value).abs() < 1e-12);
    }

    #[test]
    fn rho_gamma_examples() {
        let n = 16;
        let lattice = set(&(0..n).map(|i| (i, n)).collect::<Vec<_>>());
        assert!(is_rho_gamma_c_set(&lattice, &rational(1, n), 1.0, 2.0).holds);
        let cluster = set(&[(0, 100), (1, 100), (2, 100)]);
        let chk = is_rho_gamma_c_set(&cluster, &rational(1, 100), 0.5, 1.0);
        assert!(chk.separated && !chk.holds);
        assert!(chk.worst.unwrap().count >= 2);
        let unsep = set(&[(0, 1), (1, 200)]);
        assert!(!is_rho_gamma_c_set(&unsep, &rational(1, 100), 1.0, 10.0).separated);
    }

    #[test]
    fn golden_approximations_are_regular() {
        // c = 3 suffices at γ = 0.72 for every level tested
        let g = golden_mean();
        for n in 1..=12 {
            let x = approximate(&g, n);
            let rho = rational(1, 1 << n);
            assert!(is_rho_gamma_c_set(&x, &rho, 0.72, 3.0).holds, "n={n}");
        }
    }

    #[test]
    fn distance_examples() {
        let a = set(&[(0, 1), (1, 3)]);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), BigRational::zero());
        assert_eq!(hausdorff_distance(&set(&[(0, 1)]), &set(&[(1, 1)])).unwrap(), BigRational::one());
        assert_eq!(hausdorff_distance(&a, &PointSet1D::default()), Err(FractalError::Empty));
        let b = set(&[(0, 1), (1, 2), (1, 1)]);
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), rational(2, 3));
        assert_eq!(hausdorff_distance(&b, &a).unwrap(), rational(2, 3));
    }

    #[test]
    fn approximations() {
        let two = Radix::new(2).unwrap();
        let x = approximate(&full_shift(two), 2);
        assert_eq!(x, set(&[(0, 1), (1, 4), (1, 2), (3, 4)]));
        let g = golden_mean();
        assert_eq!(approximate(&g, 3).len(), 5);
        for n in 1..10 {
            let xn = approximate(&g, n);
            let prev = approximate(&g, n - 1);
            assert!(xn.times_r_mod_one(two).points().iter().all(|p| prev.contains(p)));
            // X_l stays within r^{-k} of X_k
            for l in n..10 {
                let d = hausdorff_distance(&approximate(&g, l), &xn).unwrap();
                assert!(d <= rational(1, 1 << n));
            }
        }
    }

    #[test]
    fn content_bounded_by_canonical_covers() {
        let g = golden_mean().embed(1 << 9);
        let p = rescale(&g, 1 << 9).unwrap();
        let rho = rational(1, 1 << 9);
        for gamma in [0.2, 0.5, 0.69, 0.9] {
            let v = content_1d(&p, &rho, gamma).value;
            assert!(v <= p.len() as f64 * libm::pow(1.0 / 512.0, gamma) + 1e-12);
            assert!(v <= libm::pow(to_f64(&p.diameter()) + 1.0 / 512.0, gamma) + 1e-12);
        }
    }

    #[test]
    fn mass_distribution_lower_bound() {
        // Uniform weights on a lattice: a window of length δ ≥ ρ holds at most
        // (δ/ρ + 1)/n ≤ 2δ mass, so κ = 2 at γ = 1.
        let n = 64;
        let lattice = set(&(0..n).map(|i| (i, n)).collect::<Vec<_>>());
        let v = content_1d(&lattice, &rational(1, n), 1.0).value;
        assert!(v >= 0.5 - 1e-9);
    }

    #[test]
    fn capped_cost_is_min_with_cap() {
        let g = golden_mean().embed(1 << 12);
        let p: Vec<f64> = g.elements().iter().map(|&x| x as f64 / 4096.0).collect();
        for gamma in [0.3, 0.6, 0.9] {
            let full = cover_cost_sorted(&p, 1.0 / 4096.0, gamma);
            for cap in [0.05, 0.2, 1.0, 5.0] {
                let c = cover_cost_capped(&p, 1.0 / 4096.0, gamma, cap);
                assert!((c - full.min(cap)).abs() < 1e-9, "{gamma} {cap} {c} {full}");
            }
        }
    }

    fn arb_points(max: usize) -> impl Strategy<Value = Vec<i64>> {
        proptest::collection::btree_set(0i64..1000, 1..=max).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn dp_matches_partition_oracles(xs in arb_points(10), rho_k in 1i64..200, gamma in 0.05f64..1.0) {
            let pts = PointSet1D::new(xs.iter().map(|&x| rational(x, 1000)).collect()).unwrap();
            let rho = rational(rho_k, 1000);
            let f = pts.to_f64();
            let v = content_1d(&pts, &rho, gamma).value;
            let o = partition_oracle(&f, to_f64(&rho), gamma);
            prop_assert!((v - o).abs() < 1e-9);
            if f.len() <= 8 {
                prop_assert!((v - set_partition_oracle(&f, to_f64(&rho), gamma)).abs() < 1e-9);
            }
            prop_assert!((cover_cost_sorted(&f, to_f64(&rho), gamma) - v).abs() < 1e-9);
        }

        #[test]
        fn content_monotone(xs in arb_points(30), rho_k in 2i64..100, g1 in 0.05f64..1.0, g2 in 0.05f64..1.0) {
            let pts = PointSet1D::new(xs.iter().map(|&x| rational(x, 1000)).collect()).unwrap();
            let (lo, hi) = if g1 < g2 { (g1, g2) } else { (g2, g1) };
            let rho = rational(rho_k, 1000);
            prop_assert!(content_1d(&pts, &rho, hi).value <= content_1d(&pts, &rho, lo).value + 1e-12);
            let finer = rational(rho_k - 1, 1000);
            prop_assert!(content_1d(&pts, &finer, lo).value <= content_1d(&pts, &rho, lo).value + 1e-12);
        }

        #[test]
        fn neighborhood_comparison(ys in arb_points(12), offs in proptest::collection::vec(-20i64..=20, 1..40), a in 1i64..3) {
            // P ⊆ [Q]_{aρ}: every point of P is within aρ of Q
            let rho_k = 10i64;
            let q = PointSet1D::new(ys.iter().map(|&y| rational(y, 1000)).collect()).unwrap();
            let p_raw: Vec<BigRational> = offs
                .iter()
                .enumerate()
                .map(|(i, &o)| {
                    let base = ys[i % ys.len()];
                    let x = (base + o * a * rho_k / 20).clamp(0, 1000);
                    rational(x, 1000)
                })
                .collect();
            let p = PointSet1D::new(p_raw).unwrap();
            let rho = rational(rho_k, 1000);
            let k = (2 * a + 1) as usize;
            prop_assert!(metric_entropy(&p, &rho) <= k * (metric_entropy(&q, &rho) + 1));
            for gamma in [0.3, 0.8] {
                prop_assert!(content_1d(&p, &rho, gamma).value <= 2.0 * k as f64 * content_1d(&q, &rho, gamma).value + 1e-12);
            }
        }
    }

    #[test]
    fn product_and_packing() {
        let a = set(&[(0, 1), (1, 2), (1, 1)]);
        let sq = a.product(&a);
        assert_eq!(sq.len(), 9);
        let pk = metric_entropy_2d(&sq, &rational(1, 2));
        assert_eq!(pk.size, 9);
        assert!(pk.lower_bound);
        assert_eq!(metric_entropy_2d(&sq, &rational(3, 4)).size, 4);
    }
}
