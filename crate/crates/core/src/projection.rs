//! Projections of finite planar sets, exceptional directions, rotation-orbit
//! bookkeeping for the base-r/base-s scale ladders, discrepancy, and leading
//! digit arcs.
//!
//! Images under `x + e^t y` are irrational, so projected points are returned as
//! [`Interval`] enclosures. Separation verdicts are made on those enclosures;
//! grid scans that only estimate a set work on midpoints.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::digits::{begins_with, n_prime, phi, psi, DigitWord, Natural, Radix};
use crate::fractal::PointSet2D;
use crate::intset::IntSet;
use crate::interval::Interval;

#[derive(Clone, Debug, PartialEq)]
pub enum ProjectionError {
    ZeroVector,
    NonPositiveScale,
    DependentBases { r: u32, s: u32, a: u32, b: u32 },
    Parameters(&'static str),
}

impl fmt::Display for ProjectionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectionError::ZeroVector => write!(f, "the zero vector has no transversality arcs"),
            ProjectionError::NonPositiveScale => write!(f, "scale must be positive"),
            ProjectionError::DependentBases { r, s, a, b } => {
                write!(f, "bases {r} and {s} are multiplicatively dependent: {r}^{a} = {s}^{b}")
            }
            ProjectionError::Parameters(what) => write!(f, "invalid parameters: {what}"),
        }
    }
}

/// Enclosure of an exact rational.
pub fn rational_interval(x: &BigRational) -> Interval {
    let (n, d) = (x.numer(), x.denom());
    if n.bits() <= 53 && d.bits() <= 53 {
        return Interval::ratio(n.to_f64().unwrap(), d.to_f64().unwrap());
    }
    let v = x.to_f64().unwrap_or(f64::NAN);
    Interval::point(v).widen_ulps(2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    /// `(x, y) ↦ x + e^t y`.
    Oblique(f64),
    /// Signed coordinate along the line at angle `θ`: `x cos θ + y sin θ`.
    Orthogonal(f64),
}

/// `x + c·y` for every point, in input order.
pub fn project_with_factor(p: &PointSet2D, c: Interval) -> Vec<Interval> {
    p.points().iter().map(|(x, y)| rational_interval(x) + c * rational_interval(y)).collect()
}

pub fn project(p: &PointSet2D, slope: Slope) -> Vec<Interval> {
    match slope {
        Slope::Oblique(t) => project_with_factor(p, Interval::point(t).exp()),
        Slope::Orthogonal(theta) => {
            let th = Interval::point(theta);
            let (c, s) = (th.cos(), th.sin());
            p.points().iter().map(|(x, y)| rational_interval(x) * c + rational_interval(y) * s).collect()
        }
    }
}

/// Disjoint half-open arcs `[a, b)` inside a domain `[lo, hi)`, kept sorted and
/// merged. On a circular domain, inserted arcs wrap around.
fn rem_euclid(x: f64, p: f64) -> f64 {
    let r = libm::fmod(x, p);
    if r < 0.0 {
        r + p
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArcSet {
    lo: f64,
    hi: f64,
    circular: bool,
    arcs: Vec<(f64, f64)>,
}

impl ArcSet {
    pub fn empty(lo: f64, hi: f64, circular: bool) -> ArcSet {
        assert!(lo < hi, "empty arc domain");
        ArcSet { lo, hi, circular, arcs: Vec::new() }
    }

    pub fn full(lo: f64, hi: f64, circular: bool) -> ArcSet {
        let mut a = ArcSet::empty(lo, hi, circular);
        a.arcs.push((lo, hi));
        a
    }

    /// Arcs on `[0, π)`, the space of directions.
    pub fn angles() -> ArcSet {
        ArcSet::empty(0.0, PI, true)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn period(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn arcs(&self) -> &[(f64, f64)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Adds `[a, b)`. Circular domains reduce `a` modulo the period first;
    /// linear domains clip.
    pub fn insert(&mut self, a: f64, b: f64) {
        if !(b > a) {
            return;
        }
        if !self.circular {
            self.insert_piece(a.max(self.lo), b.min(self.hi));
            return;
        }
        let p = self.period();
        if b - a >= p {
            self.arcs = vec![(self.lo, self.hi)];
            return;
        }
        let start = self.lo + rem_euclid(a - self.lo, p);
        let end = start + (b - a);
        if end <= self.hi {
            self.insert_piece(start, end);
        } else {
            self.insert_piece(start, self.hi);
            self.insert_piece(self.lo, self.lo + (end - self.hi));
        }
    }

    fn insert_piece(&mut self, a: f64, b: f64) {
        if !(b > a) {
            return;
        }
        let (mut a, mut b) = (a, b);
        let mut kept = Vec::with_capacity(self.arcs.len() + 1);
        for &(x, y) in &self.arcs {
            if y < a || x > b {
                kept.push((x, y));
            } else {
                a = a.min(x);
                b = b.max(y);
            }
        }
        kept.push((a, b));
        kept.sort_by(|u, v| u.0.total_cmp(&v.0));
        self.arcs = kept;
    }

    pub fn union(&self, other: &ArcSet) -> ArcSet {
        let mut out = self.clone();
        for &(a, b) in &other.arcs {
            out.insert_piece(a, b);
        }
        out
    }

    pub fn measure(&self) -> f64 {
        self.arcs.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = if self.circular { self.lo + rem_euclid(x - self.lo, self.period()) } else { x };
        self.arcs.iter().any(|&(a, b)| a <= x && x < b)
    }

    pub fn complement(&self) -> ArcSet {
        let mut out = ArcSet::empty(self.lo, self.hi, self.circular);
        let mut cur = self.lo;
        for &(a, b) in &self.arcs {
            if a > cur {
                out.arcs.push((cur, a));
            }
            cur = cur.max(b);
        }
        if cur < self.hi {
            out.arcs.push((cur, self.hi));
        }
        out
    }
}

/// Angles `θ ∈ [0, π)` with `|π_θ x| ≤ ρ`.
#[derive(Clone, Debug)]
pub struct Transversality {
    pub arcs: ArcSet,
    /// Each arc has diameter at most `k·ρ/|x|`.
    pub k: f64,
}

/// `|π_θ x| = |x|·|cos(θ − ψ)|` with `ψ = arg x`, so the set is the single arc
/// of half-width `arcsin(ρ/|x|)` around `ψ + π/2`, cut in two when it wraps.
/// Since `arcsin u ≤ πu/2`, the diameter is at most `π·ρ/|x|`.
pub fn transversality_arcs(x: (f64, f64), rho: f64) -> Result<Transversality, ProjectionError> {
    if x.0 == 0.0 && x.1 == 0.0 {
        return Err(ProjectionError::ZeroVector);
    }
    if !(rho > 0.0) {
        return Err(ProjectionError::NonPositiveScale);
    }
    let norm = libm::hypot(x.0, x.1);
    let mut arcs = ArcSet::angles();
    if rho >= norm {
        arcs.insert(0.0, PI);
    } else {
        let psi = libm::atan2(x.1, x.0);
        let half = libm::asin(rho / norm);
        let centre = psi + PI / 2.0;
        // Closed arc; the half-open representation differs on one endpoint.
        arcs.insert(centre - half, centre + half);
    }
    Ok(Transversality { arcs, k: PI })
}

/// Largest number of sorted values coverable by `m` windows `[a, a + w)`.
///
/// A set has at most `m` points pairwise `≥ w` apart iff it fits in `m` such
/// windows (the greedy packing puts each remaining point within `w` of a chosen
/// one), so this is the size of the largest subset whose `w`-metric entropy is
/// at most `m`. Windows may start at data points without loss, which gives an
/// `O(n·m)` recursion over (first uncovered point, windows left).
pub fn max_coverable(sorted: &[f64], w: f64, m: usize) -> usize {
    let n = sorted.len();
    if m == 0 || n == 0 {
        return 0;
    }
    let mut next = vec![n; n];
    let mut j = 0;
    for i in 0..n {
        j = j.max(i + 1);
        while j < n && sorted[j] - sorted[i] < w {
            j += 1;
        }
        next[i] = j;
    }
    let m = m.min(n);
    // best[k][i]: most points in sorted[i..] coverable by k windows.
    let mut prev = vec![0usize; n + 1];
    let mut cur = vec![0usize; n + 1];
    for _ in 1..=m {
        cur[n] = 0;
        for i in (0..n).rev() {
            cur[i] = cur[i + 1].max(next[i] - i + prev[next[i]]);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[0]
}

/// Whether some subset of at least `δ·n` projected points has `ρ`-metric
/// entropy at most `m`.
pub fn is_exceptional(projected: &[f64], rho: f64, delta: f64, m: usize) -> bool {
    let mut v = projected.to_vec();
    v.sort_by(f64::total_cmp);
    let need = libm::ceil(delta * v.len() as f64 - 1e-9).max(0.0) as usize;
    max_coverable(&v, rho, m) >= need
}

/// Largest `w`-separated subset of a sorted slice (left greedy).
pub fn metric_entropy_f64(sorted: &[f64], w: f64) -> usize {
    let mut count = 0;
    let mut last = f64::NEG_INFINITY;
    for &x in sorted {
        if count == 0 || x - last >= w {
            count += 1;
            last = x;
        }
    }
    count
}

#[derive(Clone, Debug)]
pub struct ExceptionalScan {
    pub step: f64,
    pub thetas: Vec<f64>,
    /// `ρ`-metric entropy of the full projection at each grid angle.
    pub entropies: Vec<usize>,
    pub flagged: Vec<bool>,
    /// Union of the grid cells `[k·step, (k+1)·step)` of flagged angles.
    pub estimate: ArcSet,
    /// Intervals of length `ρ` in a greedy cover of the flagged angles.
    pub cover_size: usize,
}

impl ExceptionalScan {
    pub fn flagged_fraction(&self) -> f64 {
        self.flagged.iter().filter(|&&f| f).count() as f64 / self.flagged.len().max(1) as f64
    }
}

/// The grid step the scans default to, fine enough that a cover of flagged grid
/// angles misses `E` by at most one cell per endpoint.
pub fn default_step(rho: f64) -> f64 {
    rho / 4.0
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = libm::ceil((hi - lo) / step) as usize;
    // The last cell may be partial; its sample sits in the middle of what is left.
    (0..n).map(|k| (lo + k as f64 * step + (lo + (k + 1) as f64 * step).min(hi)) / 2.0).collect()
}

fn greedy_point_cover(sorted: &[f64], len: f64) -> usize {
    let mut count = 0;
    let mut reach = f64::NEG_INFINITY;
    for &x in sorted {
        if x > reach {
            count += 1;
            reach = x + len;
        }
    }
    count
}

/// Classifies a grid of angles in `[0, π)` by exceptional membership.
pub fn exceptional_scan(a: &PointSet2D, rho: f64, delta: f64, m: usize, step: f64) -> ExceptionalScan {
    let pts: Vec<(f64, f64)> =
        a.points().iter().map(|(x, y)| (rational_interval(x).mid(), rational_interval(y).mid())).collect();
    let thetas = grid(0.0, PI, step);
    let mut entropies = Vec::with_capacity(thetas.len());
    let mut flagged = Vec::with_capacity(thetas.len());
    let mut estimate = ArcSet::angles();
    let mut buf = Vec::with_capacity(pts.len());
    for (k, &th) in thetas.iter().enumerate() {
        let (c, s) = (libm::cos(th), libm::sin(th));
        buf.clear();
        buf.extend(pts.iter().map(|&(x, y)| x * c + y * s));
        buf.sort_by(f64::total_cmp);
        entropies.push(metric_entropy_f64(&buf, rho));
        let need = libm::ceil(delta * buf.len() as f64 - 1e-9).max(0.0) as usize;
        let f = max_coverable(&buf, rho, m) >= need;
        flagged.push(f);
        if f {
            estimate.insert(k as f64 * step, (k + 1) as f64 * step);
        }
    }
    let hits: Vec<f64> = thetas.iter().zip(&flagged).filter(|(_, &f)| f).map(|(&t, _)| t).collect();
    let cover_size = greedy_point_cover(&hits, rho);
    ExceptionalScan { step, thetas, entropies, flagged, estimate, cover_size }
}

#[derive(Clone, Copy, Debug)]
pub struct SlopeParams {
    pub eps: f64,
    pub gamma2: f64,
    pub gamma3: f64,
    pub rho: f64,
    pub c3: f64,
}

impl SlopeParams {
    fn validate(&self) -> Result<(), ProjectionError> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(ProjectionError::Parameters("rho must lie in (0, 1)"));
        }
        if !(0.0 < self.gamma2 && self.gamma2 < self.gamma3) {
            return Err(ProjectionError::Parameters("need 0 < gamma2 < gamma3"));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(ProjectionError::Parameters("eps must lie in (0, 1)"));
        }
        if !(self.c3 >= 1.0) {
            return Err(ProjectionError::Parameters("c3 must be at least 1"));
        }
        Ok(())
    }

    /// `⌈ρ^{-γ₃}⌉`: subsets at least this large must keep a separated image.
    pub fn large_subset(&self) -> usize {
        libm::ceil(libm::pow(self.rho, -self.gamma3) - 1e-9) as usize
    }

    /// `⌈ρ^{-γ₂}⌉`: the size of the separated image that must survive.
    pub fn separated_size(&self) -> usize {
        libm::ceil(libm::pow(self.rho, -self.gamma2) - 1e-9) as usize
    }

    pub fn separation(&self) -> f64 {
        self.c3 * self.rho
    }
}

#[derive(Clone, Debug)]
pub struct GoodSlopes {
    pub grid: Vec<f64>,
    pub good: Vec<bool>,
    /// Union of the grid cells around good slopes.
    pub set: ArcSet,
}

impl GoodSlopes {
    pub fn bad_measure(&self) -> f64 {
        self.set.complement().measure()
    }
}

/// Whether every subset of `A` with at least `⌈ρ^{-γ₃}⌉` points keeps a
/// `c₃ρ`-separated image of at least `⌈ρ^{-γ₂}⌉` points under `x + c·y`.
///
/// The worst subset is the one with the most points inside `⌈ρ^{-γ₂}⌉ − 1`
/// windows of length `c₃ρ`, found by [`max_coverable`].
pub fn slope_is_good(projected_mids: &[f64], p: &SlopeParams) -> bool {
    let mut v = projected_mids.to_vec();
    v.sort_by(f64::total_cmp);
    let k = p.separated_size();
    max_coverable(&v, p.separation(), k.saturating_sub(1)) < p.large_subset()
}

/// Scans `t ∈ [lo, hi)` for slopes at which `A` keeps separated images.
pub fn good_slopes(a: &PointSet2D, lo: f64, hi: f64, p: &SlopeParams, step: f64) -> Result<GoodSlopes, ProjectionError> {
    p.validate()?;
    if !(lo < hi) || !(step > 0.0) {
        return Err(ProjectionError::Parameters("slope interval must be non-empty"));
    }
    let pts: Vec<(f64, f64)> =
        a.points().iter().map(|(x, y)| (rational_interval(x).mid(), rational_interval(y).mid())).collect();
    let grid = grid(lo, hi, step);
    let mut good = Vec::with_capacity(grid.len());
    let mut set = ArcSet::empty(lo, hi, false);
    let mut buf = Vec::with_capacity(pts.len());
    for (k, &t) in grid.iter().enumerate() {
        let c = libm::exp(t);
        buf.clear();
        buf.extend(pts.iter().map(|&(x, y)| x + c * y));
        let g = slope_is_good(&buf, p);
        good.push(g);
        if g {
            set.insert(lo + k as f64 * step, lo + (k + 1) as f64 * step);
        }
    }
    Ok(GoodSlopes { grid, good, set })
}

/// Indices of a subset whose enclosures are certainly pairwise `≥ sep` apart,
/// one per cluster, chosen greedily left to right.
pub fn separated_subset(values: &[Interval], sep: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].mid().total_cmp(&values[j].mid()).then(i.cmp(&j)));
    let sep = Interval::point(sep);
    let mut out: Vec<usize> = Vec::new();
    for i in order {
        match out.last() {
            None => out.push(i),
            Some(&l) => {
                if sep.certainly_le(values[i] - values[l]) {
                    out.push(i);
                }
            }
        }
    }
    out
}

/// Whether the enclosures are certainly pairwise `≥ sep` apart.
pub fn is_separated(values: &[Interval], sep: f64) -> bool {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.mid().total_cmp(&b.mid()));
    let sep = Interval::point(sep);
    v.windows(2).all(|w| sep.certainly_le(w[1] - w[0]))
}

/// Coincidence `r^a = s^b` with `1 ≤ a, b ≤ 64`, if any.
pub fn power_coincidence(r: Radix, s: Radix) -> Option<(u32, u32)> {
    let rs: Vec<BigUint> = (1..=64u64).map(|a| r.pow(a)).collect();
    for b in 1..=64u64 {
        let sb: BigUint = s.pow(b);
        if let Ok(i) = rs.binary_search(&sb) {
            return Some((i as u32 + 1, b as u32));
        }
    }
    None
}

pub fn multiplicatively_independent(r: Radix, s: Radix) -> bool {
    power_coincidence(r, s).is_none()
}

/// The rotation `x ↦ x + α mod β` with `α = log(r^m/s^{m′})`, `β = log s`,
/// which records how far `r^{-nm}` sits above `s^{-(nm)′}` on a log scale.
#[derive(Clone, Debug)]
pub struct RotationOrbit {
    pub r: Radix,
    pub s: Radix,
    pub m: u64,
    pub m_prime: u64,
    pub alpha: Interval,
    pub beta: Interval,
    /// `R^n(0)` by repeated addition and reduction in `f64`.
    pub orbit: Vec<f64>,
    /// `R^n(0) = nm·log r − (nm)′·log s`, enclosed using the exact `(nm)′`.
    pub direct: Vec<Interval>,
    /// `(nm)′` for `n = 0..=N`, from exact powers.
    pub primes: Vec<u64>,
    /// Whether `(n+1)m` gains an extra base-s digit over `nm`, i.e.
    /// `s^{(nm)′+m′+1} ≤ r^{(n+1)m}`, for `n = 0..N`.
    pub carries: Vec<bool>,
}

impl RotationOrbit {
    /// `|R^n(0) + (nm)′ log s − nm log r|` for the iterated orbit.
    pub fn residual(&self, n: usize) -> f64 {
        let d = self.direct[n];
        (self.orbit[n] - d.lo()).abs().max((self.orbit[n] - d.hi()).abs())
    }

    pub fn max_residual(&self) -> f64 {
        (0..self.orbit.len()).map(|n| self.residual(n)).fold(0.0, f64::max)
    }

    /// The carry predicted by the rotation, `R^n(0) + α ≥ β`, decided on the
    /// enclosures; `None` when they overlap.
    pub fn predicted_carry(&self, n: usize) -> Option<bool> {
        let lhs = self.direct[n] + self.alpha;
        if self.beta.certainly_le(lhs) {
            Some(true)
        } else if lhs.certainly_lt(self.beta) {
            Some(false)
        } else {
            None
        }
    }

    /// `e^{t + R^n(0)}`, the factor that turns a level-`n` rectangle back into
    /// a unit one: `Π_{e^t}(r^{-nm}x, s^{-(nm)′}y) = r^{-nm}·Π_{e^{t+R^n(0)}}(x, y)`.
    pub fn skew_factor(&self, t: f64, n: usize) -> Interval {
        (Interval::point(t) + self.direct[n]).exp()
    }
}

pub fn rotation_orbit(r: Radix, s: Radix, m: u64, n_max: usize) -> Result<RotationOrbit, ProjectionError> {
    if let Some((a, b)) = power_coincidence(r, s) {
        return Err(ProjectionError::DependentBases { r: r.get(), s: s.get(), a, b });
    }
    if m == 0 {
        return Err(ProjectionError::Parameters("m must be positive"));
    }
    let m_prime = n_prime(m, r, s);
    let ln_r = Interval::from_u128(r.get() as u128).ln();
    let ln_s = Interval::from_u128(s.get() as u128).ln();
    let alpha = Interval::from_u128(m as u128) * ln_r - Interval::from_u128(m_prime as u128) * ln_s;
    let beta = ln_s;

    // r^{nm} and s^{(nm)′} advanced one level at a time.
    let step_r: BigUint = r.pow(m);
    let s_big = BigUint::from(s.get());
    let s_mp: BigUint = s.pow(m_prime);
    let mut rn = BigUint::one();
    let mut sk = BigUint::one();
    let mut k = 0u64;
    let mut primes = Vec::with_capacity(n_max + 1);
    let mut carries = Vec::with_capacity(n_max);
    primes.push(0);
    for _ in 0..n_max {
        rn *= &step_r;
        sk *= &s_mp;
        k += m_prime;
        let next = &sk * &s_big;
        let carry = next <= rn;
        if carry {
            sk = next;
            k += 1;
        }
        debug_assert!(&sk * &s_big > rn);
        carries.push(carry);
        primes.push(k);
    }

    let direct: Vec<Interval> = primes
        .iter()
        .enumerate()
        .map(|(n, &k)| Interval::from_u128(n as u128 * m as u128) * ln_r - Interval::from_u128(k as u128) * ln_s)
        .collect();
    let (a, b) = (alpha.mid(), beta.mid());
    let mut orbit = Vec::with_capacity(n_max + 1);
    let mut x = 0.0f64;
    orbit.push(x);
    for _ in 0..n_max {
        x += a;
        if x >= b {
            x -= b;
        }
        orbit.push(x);
    }
    Ok(RotationOrbit { r, s, m, m_prime, alpha, beta, orbit, direct, primes, carries })
}

/// `sup_a |#{x_n < a}/N − a|` over anchored intervals `[0, a)`.
pub fn star_discrepancy(points: &[f64]) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = points.to_vec();
    v.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        d = d.max((i + 1) as f64 / nf - x).max(x - i as f64 / nf);
    }
    d.min(1.0)
}

/// `sup_I |#{x_n ∈ I}/N − |I||` over all intervals `I ⊆ [0, 1)`.
pub fn discrepancy(points: &[f64]) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let mut v = points.to_vec();
    v.sort_by(f64::total_cmp);
    let nf = n as f64;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for (i, &x) in v.iter().enumerate() {
        let e = (i + 1) as f64 / nf - x;
        hi = hi.max(e);
        lo = lo.min(e);
    }
    (1.0 / nf + hi - lo).min(1.0)
}

pub fn visit_fraction(points: &[f64], j: &ArcSet) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().filter(|&&x| j.contains(x)).count() as f64 / points.len() as f64
}

/// The arc of `{log_r n}` for integers `n` that begin with `w` in base `r`:
/// from `{log_r (w)_r}` to `{log_r((w)_r + 1)}` on the circle `[0, 1)`.
///
/// Requires `(w)_r ≥ 1`.
pub fn word_arc(w: &DigitWord) -> ArcSet {
    let v: BigUint = w.big_endian_value();
    assert!(!v.is_zero(), "the word must have a non-zero value");
    let ln_r = libm::log(w.radix().get() as f64);
    let a = crate::stats::ln_big(&v) / ln_r;
    let b = crate::stats::ln_big(&(v + 1u32)) / ln_r;
    let mut arc = ArcSet::empty(0.0, 1.0, true);
    if b - a >= 1.0 - 1e-15 {
        arc.insert(0.0, 1.0);
    } else {
        arc.insert(a - libm::floor(a), a - libm::floor(a) + (b - a));
    }
    arc
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BeginsWithHit<T = u64> {
    pub element: T,
    /// The element it was cut from by deleting base-s digits.
    pub source: T,
    pub leading_deleted: u32,
    pub trailing_deleted: u32,
}

/// Searches the base-s digit windows of each seed for an integer that begins
/// with `w` in base `w.radix()`. Every window of an element of a
/// `×s`-invariant set lies in the set again, since windows are reached by
/// deleting leading digits (`Ψ_s`) and trailing digits (`Φ_s`).
pub fn find_beginning_with_seeds<T: Natural>(
    seeds: impl IntoIterator<Item = T>,
    s: Radix,
    w: &DigitWord,
) -> Option<BeginsWithHit<T>> {
    let r = w.radix();
    for seed in seeds {
        let mut x = seed.clone();
        let mut trailing = 0;
        while !x.is_zero() {
            let mut y = x.clone();
            let mut leading = 0;
            while !y.is_zero() {
                if begins_with(&y, w, r) {
                    return Some(BeginsWithHit { element: y, source: seed, leading_deleted: leading, trailing_deleted: trailing });
                }
                y = psi(&y, s);
                leading += 1;
            }
            x = phi(&x, s);
            trailing += 1;
        }
    }
    None
}

/// [`find_beginning_with_seeds`] over the elements of `b`, largest first.
pub fn find_beginning_with(b: &IntSet, s: Radix, w: &DigitWord) -> Option<BeginsWithHit> {
    find_beginning_with_seeds(b.elements().iter().rev().copied(), s, w)
}
