//! Sets whose mass and discrete Hausdorff dimensions separate, or whose
//! dimensions oscillate between scales. All are truncated to `[0, bound)`.

use alloc::vec::Vec;

use super::IntSet;

/// `x_n = 2^{n(n+1)/2}`: gaps grow fast enough that `log(x_{n+1} − x_n) / log x_{n+1} → 1`.
pub fn triangular_exponents(bound: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for n in 0u32.. {
        let e = n * (n + 1) / 2;
        if e >= 64 || (1u64 << e) >= bound {
            out.push(bound);
            break;
        }
        out.push(1u64 << e);
    }
    out
}

/// `{0} ∪ ⋃_n [x_{2n}, x_{2n+1}]`. Lower dimensions 0, upper dimensions 1.
pub fn alternating_blocks(x: &[u64], bound: u64) -> IntSet {
    let mut v = Vec::new();
    if bound > 0 {
        v.push(0);
    }
    for pair in x.chunks(2) {
        let lo = pair[0].max(1);
        let hi = pair.get(1).map_or(bound, |&h| h.saturating_add(1)).min(bound);
        v.extend(lo..hi);
    }
    v.sort_unstable();
    v.dedup();
    IntSet::from_sorted(v, bound)
}

/// `{0} ∪ (ℕ₀ ∖ A)` on the same truncation, so that `A + B ⊇ A ∪ B = [0, bound)`.
pub fn complement_with_zero(a: &IntSet) -> IntSet {
    IntSet::from_predicate(a.bound(), |x| x == 0 || !a.contains(x))
}

fn n_over_ln_n(n: u32) -> f64 {
    n as f64 / libm::log(n as f64)
}

/// `{0,…,16} ∪ ⋃_{n≥2} [2^n, 2^n + ⌊2^{n − n/ln n}⌋]`: mass dimension 1,
/// discrete Hausdorff dimension 0.
pub fn sparse_blocks(bound: u64) -> IntSet {
    let mut v: Vec<u64> = (0..17u64.min(bound)).collect();
    for n in 2u32..64 {
        let lo = 1u64 << n;
        if lo >= bound {
            break;
        }
        let len = libm::floor(libm::exp2(n as f64 - n_over_ln_n(n))) as u64;
        let hi = lo.saturating_add(len).min(bound - 1);
        v.extend(lo..=hi);
    }
    v.sort_unstable();
    v.dedup();
    IntSet::from_sorted(v, bound)
}

/// `{0,…,16}` together with `2⌊2^{n/ln n}⌋` near-equally spaced points in
/// each `[2^n, 2^{n+1})`. Mass dimension 0, and `sparse_blocks + spread_points`
/// covers everything.
pub fn spread_points(bound: u64) -> IntSet {
    let mut v: Vec<u64> = (0..17u64.min(bound)).collect();
    for n in 2u32..64 {
        let lo = 1u64 << n;
        if lo >= bound {
            break;
        }
        let k = (2 * libm::floor(libm::exp2(n_over_ln_n(n))) as u64).min(lo);
        for j in 0..k {
            let x = lo + ((j as u128 * lo as u128) / k as u128) as u64;
            if x < bound {
                v.push(x);
            }
        }
    }
    v.sort_unstable();
    v.dedup();
    IntSet::from_sorted(v, bound)
}
