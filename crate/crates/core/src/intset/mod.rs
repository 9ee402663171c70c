//! Truncated sets of non-negative integers, `A ∩ [0, bound)`.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};

use crate::digits::{self, Radix};
use crate::fractal::PointSet1D;

mod counterexample;
mod dimension;
pub mod examples;

pub use counterexample::{
    closed_under_multiplication, counterexample_pair, counterexample_parts, counterexample_sumset_counts, mass_bracket_holds,
    phi_fixed, sumset_bound_holds, ApPiece, CounterexampleParts,
};
pub use dimension::{hausdorff_dimension, mass_dimension, DimensionEstimate, DimensionKind, Level, RATIO_FLOOR};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IntSetError {
    ElementOutOfBound { element: u64, bound: u64 },
    NonPositiveScalar,
    ZeroWindow,
    WindowBeyondBound { window: u64, bound: u64 },
    BoundTooLarge(u64),
}

impl fmt::Display for IntSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntSetError::ElementOutOfBound { element, bound } => {
                write!(f, "element {element} is not below the bound {bound}")
            }
            IntSetError::NonPositiveScalar => write!(f, "scalars must be positive"),
            IntSetError::ZeroWindow => write!(f, "window length must be positive"),
            IntSetError::WindowBeyondBound { window, bound } => {
                write!(f, "window {window} exceeds the truncation bound {bound}")
            }
            IntSetError::BoundTooLarge(b) => write!(f, "bound {b} is too large for a bitset"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntSet {
    elements: Vec<u64>,
    bound: u64,
}

impl IntSet {
    pub fn new(mut elements: Vec<u64>, bound: u64) -> Result<IntSet, IntSetError> {
        elements.sort_unstable();
        elements.dedup();
        if let Some(&last) = elements.last() {
            if last >= bound {
                return Err(IntSetError::ElementOutOfBound { element: last, bound });
            }
        }
        Ok(IntSet { elements, bound })
    }

    /// Caller guarantees sorted, duplicate-free and below `bound`.
    pub fn from_sorted(elements: Vec<u64>, bound: u64) -> IntSet {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(elements.last().is_none_or(|&x| x < bound));
        IntSet { elements, bound }
    }

    pub fn from_predicate(bound: u64, mut keep: impl FnMut(u64) -> bool) -> IntSet {
        IntSet { elements: (0..bound).filter(|&n| keep(n)).collect(), bound }
    }

    pub fn full(bound: u64) -> IntSet {
        IntSet { elements: (0..bound).collect(), bound }
    }

    /// Integers below `bound` whose base-r digits all lie in `allowed`.
    pub fn restricted_digits(r: Radix, allowed: &[u32], bound: u64) -> IntSet {
        let mut digits: Vec<u64> = allowed.iter().map(|&d| d as u64).collect();
        digits.sort_unstable();
        digits.dedup();
        let rr = r.get() as u64;
        let mut out = vec![0u64];
        if bound == 0 {
            return IntSet { elements: Vec::new(), bound };
        }
        // Grow by one significant digit at a time.
        let mut layer = vec![0u64];
        let mut scale = 1u64;
        loop {
            let mut next = Vec::new();
            for &x in &layer {
                for &d in &digits {
                    let Some(v) = d.checked_mul(scale).and_then(|v| v.checked_add(x)) else { continue };
                    if v < bound {
                        next.push(v);
                        if d != 0 {
                            out.push(v);
                        }
                    }
                }
            }
            match scale.checked_mul(rr) {
                Some(s) if s < bound && !next.is_empty() => scale = s,
                _ => break,
            }
            layer = next;
        }
        out.sort_unstable();
        out.dedup();
        IntSet { elements: out, bound }
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<u64> {
        self.elements
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.elements.binary_search(&n).is_ok()
    }

    /// `|A ∩ [0, x)|`.
    pub fn count_below(&self, x: u64) -> usize {
        self.elements.partition_point(|&a| a < x)
    }

    /// `A ∩ [0, new_bound)` for `new_bound ≤ bound`.
    pub fn truncate(&self, new_bound: u64) -> IntSet {
        let b = new_bound.min(self.bound);
        IntSet { elements: self.elements[..self.count_below(b)].to_vec(), bound: b }
    }

    /// Largest `K` with `[0, K] ⊆ A`, or `None` when `0 ∉ A`.
    pub fn initial_run(&self) -> Option<u64> {
        let mut k = None;
        for (i, &a) in self.elements.iter().enumerate() {
            if a != i as u64 {
                break;
            }
            k = Some(a);
        }
        k
    }
}

/// Results of the two invariance tests.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Invariance {
    pub phi_ok: bool,
    pub psi_ok: bool,
}

impl Invariance {
    pub fn both(self) -> bool {
        self.phi_ok && self.psi_ok
    }
}

/// Both images are smaller than their argument, so a truncation never hides a
/// counterexample.
pub fn check_invariance(a: &IntSet, r: Radix) -> Invariance {
    let phi_ok = a.elements.iter().all(|&x| a.contains(digits::phi(&x, r)));
    let psi_ok = a.elements.iter().all(|&x| a.contains(digits::psi(&x, r)));
    Invariance { phi_ok, psi_ok }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DigitMap {
    Phi(Radix),
    Psi(Radix),
}

impl DigitMap {
    pub fn apply(self, n: u64) -> u64 {
        match self {
            DigitMap::Phi(r) => digits::phi(&n, r),
            DigitMap::Psi(r) => digits::psi(&n, r),
        }
    }

    /// The four maps for a pair of bases.
    pub fn all_four(r: Radix, s: Radix) -> [DigitMap; 4] {
        [DigitMap::Phi(r), DigitMap::Psi(r), DigitMap::Phi(s), DigitMap::Psi(s)]
    }
}

/// Smallest superset of `seed` closed under `maps`. Every map is
/// non-increasing, so the result stays inside the seed's truncation.
pub fn closure(seed: &IntSet, maps: &[DigitMap]) -> IntSet {
    let mut seen: BTreeSet<u64> = seed.elements.iter().copied().collect();
    let mut stack: Vec<u64> = seed.elements.clone();
    while let Some(n) = stack.pop() {
        for m in maps {
            let k = m.apply(n);
            if seen.insert(k) {
                stack.push(k);
            }
        }
    }
    IntSet { elements: seen.into_iter().collect(), bound: seed.bound }
}

/// The largest subset `A′ ⊆ A` with `Φ_r(A′) = Ψ_r(A′) = A′`, as far as the
/// truncation can see it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Core {
    pub set: IntSet,
    pub iterations: u32,
    /// Results are reported on `[0, safe_bound)` only.
    pub safe_bound: u64,
}

/// Greatest fixpoint of `X ↦ X ∩ Φ_r(X) ∩ Ψ_r(X)`.
///
/// Near the top of the truncation elements lose their preimages for reasons
/// that have nothing to do with `A`, and those deletions travel downward by
/// about a factor `r²` per round. After round `t` the result is trusted on
/// `[0, bound/r^{2t})`, and the iteration stops once a round changes nothing
/// inside that window.
pub fn core(a: &IntSet, r: Radix) -> Core {
    let rr = r.get() as u64;
    let mut cur: Vec<u64> = a.elements.clone();
    let mut t = 0u32;
    let mut inner = a.bound;
    loop {
        t += 1;
        inner = inner / rr / rr;
        let set_cur = IntSet { elements: cur.clone(), bound: a.bound };
        let mut phi_img: Vec<u64> = cur.iter().map(|&x| digits::phi(&x, r)).collect();
        phi_img.sort_unstable();
        phi_img.dedup();
        let mut psi_img: Vec<u64> = cur.iter().map(|&x| digits::psi(&x, r)).collect();
        psi_img.sort_unstable();
        psi_img.dedup();
        let phi_set = IntSet { elements: phi_img, bound: a.bound };
        let psi_set = IntSet { elements: psi_img, bound: a.bound };
        let next: Vec<u64> = cur
            .iter()
            .copied()
            .filter(|&x| phi_set.contains(x) && psi_set.contains(x))
            .collect();
        let k_next = next.partition_point(|&x| x < inner);
        let k_cur = set_cur.count_below(inner);
        let stable = next[..k_next] == cur[..k_cur];
        cur = next;
        if stable || inner == 0 {
            let k = cur.partition_point(|&x| x < inner);
            cur.truncate(k);
            return Core { set: IntSet { elements: cur, bound: inner }, iterations: t, safe_bound: inner };
        }
    }
}

/// Checks `Φ_r(C) = Ψ_r(C) = C` on `[0, window)`: both images stay inside
/// `C`, and every element below `window` has a preimage under each map.
pub fn is_surjective_fixed_point(c: &IntSet, r: Radix, window: u64) -> bool {
    let inv = check_invariance(c, r);
    if !inv.both() {
        return false;
    }
    let mut phi_hit = BTreeSet::new();
    let mut psi_hit = BTreeSet::new();
    for &x in &c.elements {
        phi_hit.insert(digits::phi(&x, r));
        psi_hit.insert(digits::psi(&x, r));
    }
    c.elements
        .iter()
        .take_while(|&&x| x < window)
        .all(|x| phi_hit.contains(x) && psi_hit.contains(x))
}

const BITSET_LIMIT: u64 = 1 << 34;

struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn new(n: u64) -> Bits {
        Bits { words: vec![0; n.div_ceil(64) as usize] }
    }

    fn set(&mut self, i: u64) {
        self.words[(i >> 6) as usize] |= 1 << (i & 63);
    }

    fn into_sorted(self) -> Vec<u64> {
        let mut out = Vec::new();
        for (w, &bits) in self.words.iter().enumerate() {
            let mut b = bits;
            while b != 0 {
                let t = b.trailing_zeros() as u64;
                out.push(w as u64 * 64 + t);
                b &= b - 1;
            }
        }
        out
    }
}

/// `(A + B) ∩ [0, bound)`.
pub fn sumset(a: &IntSet, b: &IntSet, bound: u64) -> Result<IntSet, IntSetError> {
    collect_pairs(a, b, bound, |x, y| x.checked_add(y))
}

fn collect_pairs(
    a: &IntSet,
    b: &IntSet,
    bound: u64,
    f: impl Fn(u64, u64) -> Option<u64>,
) -> Result<IntSet, IntSetError> {
    if bound <= BITSET_LIMIT {
        let mut bits = Bits::new(bound);
        for &x in &a.elements {
            for &y in &b.elements {
                if let Some(v) = f(x, y) {
                    if v < bound {
                        bits.set(v);
                    }
                }
            }
        }
        Ok(IntSet { elements: bits.into_sorted(), bound })
    } else {
        let mut out = Vec::new();
        for &x in &a.elements {
            for &y in &b.elements {
                if let Some(v) = f(x, y) {
                    if v < bound {
                        out.push(v);
                    }
                }
            }
        }
        IntSet::new(out, bound)
    }
}

/// `{⌊λa + ηb⌋} ∩ [0, bound)` with exact rational scalars.
pub fn floor_affine_sumset(
    a: &IntSet,
    b: &IntSet,
    lambda: Ratio<u64>,
    eta: Ratio<u64>,
    bound: u64,
) -> Result<IntSet, IntSetError> {
    if *lambda.numer() == 0 || *eta.numer() == 0 {
        return Err(IntSetError::NonPositiveScalar);
    }
    let (p1, q1) = (*lambda.numer() as u128, *lambda.denom() as u128);
    let (p2, q2) = (*eta.numer() as u128, *eta.denom() as u128);
    let den = q1 * q2;
    collect_pairs(a, b, bound, |x, y| {
        let num = p1.checked_mul(x as u128)?.checked_mul(q2)?
            .checked_add(p2.checked_mul(y as u128)?.checked_mul(q1)?)?;
        u64::try_from(num / den).ok()
    })
}

/// `{⌊λa + η⌋} ∩ [0, bound)`; `η` may be zero here.
pub fn floor_affine_image(a: &IntSet, lambda: Ratio<u64>, eta: Ratio<u64>, bound: u64) -> Result<IntSet, IntSetError> {
    if *lambda.numer() == 0 {
        return Err(IntSetError::NonPositiveScalar);
    }
    let (p1, q1) = (*lambda.numer() as u128, *lambda.denom() as u128);
    let (p2, q2) = (*eta.numer() as u128, *eta.denom() as u128);
    let mut out = Vec::with_capacity(a.len());
    for &x in &a.elements {
        let v = (p1 * x as u128 * q2 + p2 * q1) / (q1 * q2);
        if v < bound as u128 {
            out.push(v as u64);
        }
    }
    IntSet::new(out, bound)
}

/// `{a/N : a ∈ A ∩ [0, N)}`.
pub fn rescale(a: &IntSet, n: u64) -> Result<PointSet1D, IntSetError> {
    if n == 0 {
        return Err(IntSetError::ZeroWindow);
    }
    if n > a.bound {
        return Err(IntSetError::WindowBeyondBound { window: n, bound: a.bound });
    }
    let den = BigInt::from(n);
    let pts: Vec<BigRational> = a.elements[..a.count_below(n)]
        .iter()
        .map(|&x| BigRational::new(BigInt::from(x), den.clone()))
        .collect();
    Ok(PointSet1D::from_sorted(pts))
}

/// `r^k` as `u64` when it fits.
pub(crate) fn pow_u64(r: Radix, k: u32) -> Option<u64> {
    r.checked_pow_u64(k)
}

/// Number of full base-r levels below a bound: the largest `N` with `r^N ≤ bound`.
pub fn levels_below(r: Radix, bound: u64) -> u32 {
    if bound == 0 {
        return 0;
    }
    digits::floor_log(&BigUint::from(bound), r).unwrap_or(0) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: u32) -> Radix {
        Radix::new(x).unwrap()
    }

    #[test]
    fn invariance_examples() {
        let cantor = IntSet::restricted_digits(r(3), &[0, 2], 3u64.pow(8));
        assert_eq!(cantor.len(), 256);
        assert!(check_invariance(&cantor, r(3)).both());
        let mut pows = vec![0u64, 1];
        pows.extend((1..20).map(|k| 1u64 << k));
        let p = IntSet::new(pows, 1 << 20).unwrap();
        assert!(check_invariance(&p, r(2)).both());
        let bad = IntSet::new(vec![0, 3], 4).unwrap();
        assert_eq!(check_invariance(&bad, r(2)), Invariance { phi_ok: false, psi_ok: false });
        let bad = IntSet::new(vec![0, 1, 3], 4).unwrap();
        assert_eq!(check_invariance(&bad, r(2)), Invariance { phi_ok: true, psi_ok: true });
        let bad = IntSet::new(vec![0, 3, 6], 8).unwrap();
        assert!(!check_invariance(&bad, r(2)).psi_ok);
    }

    #[test]
    fn closures() {
        let seed = IntSet::new(vec![6], 8).unwrap();
        assert_eq!(closure(&seed, &[DigitMap::Phi(r(2))]).elements(), &[0, 1, 3, 6]);
        assert_eq!(closure(&seed, &[DigitMap::Psi(r(2))]).elements(), &[0, 2, 6]);
        let seed = IntSet::new(vec![71393], 100000).unwrap();
        let c = closure(&seed, &[DigitMap::Phi(r(10)), DigitMap::Psi(r(10))]);
        for x in [7139, 1393, 139, 393, 71393, 0] {
            assert!(c.contains(x), "{x}");
        }
        let zero = IntSet::new(vec![0], 1 << 20).unwrap();
        assert_eq!(closure(&zero, &DigitMap::all_four(r(2), r(3))).elements(), &[0]);
    }

    #[test]
    fn cores() {
        let cantor = IntSet::restricted_digits(r(3), &[0, 2], 3u64.pow(10));
        let c = core(&cantor, r(3));
        assert!(c.safe_bound > 0);
        assert_eq!(c.set, cantor.truncate(c.safe_bound));
        assert!(is_surjective_fixed_point(&c.set, r(3), c.safe_bound / 9));

        let mut pows = vec![0u64, 1];
        pows.extend((1..20).map(|k| 1u64 << k));
        let p = IntSet::new(pows, 1 << 20).unwrap();
        assert_eq!(core(&p, r(2)).set.elements(), &[0]);

        let golden = crate::subshift::golden_mean().embed(1 << 20);
        let c = core(&golden, r(2));
        assert_eq!(c.set, golden.truncate(c.safe_bound));
        assert!(c.safe_bound >= 1 << 14);
        assert!(is_surjective_fixed_point(&c.set, r(2), c.safe_bound / 8));
    }

    #[test]
    fn sums() {
        let a = IntSet::new(vec![0, 1], 2).unwrap();
        assert_eq!(sumset(&a, &a, 10).unwrap().elements(), &[0, 1, 2]);
        let b = IntSet::new(vec![0, 2], 3).unwrap();
        let s = floor_affine_sumset(&a, &b, Ratio::new(1, 2), Ratio::new(1, 1), 10).unwrap();
        assert_eq!(s.elements(), &[0, 2]);
        assert!(floor_affine_sumset(&a, &b, Ratio::new(0, 1), Ratio::new(1, 1), 10).is_err());
        let d = IntSet::restricted_digits(r(10), &[0, 1, 2], 100000);
        let dd = sumset(&d, &d, 100000).unwrap();
        for n in 1..=5u32 {
            assert_eq!(dd.count_below(10u64.pow(n)), 5usize.pow(n));
        }
    }

    #[test]
    fn rescaling() {
        let a = IntSet::new(vec![0, 2, 4], 5).unwrap();
        let p = rescale(&a, 4).unwrap();
        assert_eq!(p.len(), 2);
        assert!(rescale(&a, 0).is_err());
        let e = IntSet::new(vec![], 5).unwrap();
        assert_eq!(rescale(&e, 4).unwrap().len(), 0);
    }
}
