//! Sets that are `Φ`-invariant and closed under multiplication by their base,
//! yet whose sumset stays small:
//! `A = {0} ∪ ⋃ r^ℓ I_i` with `I_i = [r^i, r^i + ⌊√(r^{i+1})⌋]`, and `B` the
//! same construction in base `s`.
//!
//! Each `r^ℓ I_i` is an arithmetic progression, which keeps the sumset count
//! at `2^30` tractable: sums of two progressions are written into a bitset one
//! residue class at a time instead of pair by pair.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;

use super::{IntSet, IntSetError};
use crate::digits::Radix;

/// `{start + step·k : 0 ≤ k < len}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApPiece {
    pub start: u64,
    pub step: u64,
    pub len: u64,
}

impl ApPiece {
    pub fn last(&self) -> u64 {
        self.start + self.step * (self.len - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterexampleParts {
    pub bound: u64,
    pub a_pieces: Vec<ApPiece>,
    pub b_pieces: Vec<ApPiece>,
}

/// `⌊√(r^{i+1})⌋ + 1` points in `I_i`.
fn interval_len(r: u64, i: u32) -> u64 {
    let p = (r as u128).pow(i + 1);
    p.isqrt() as u64 + 1
}

fn pieces(r: Radix, bound: u64) -> Vec<ApPiece> {
    let rr = r.get() as u64;
    let mut out = Vec::new();
    let mut i = 0u32;
    let mut ri = 1u64;
    while ri < bound {
        let len = interval_len(rr, i);
        let mut step = 1u64;
        let mut start = ri;
        while start < bound {
            let fit = (bound - 1 - start) / step + 1;
            out.push(ApPiece { start, step, len: len.min(fit) });
            match (start.checked_mul(rr), step.checked_mul(rr)) {
                (Some(s), Some(t)) => {
                    start = s;
                    step = t;
                }
                _ => break,
            }
        }
        match ri.checked_mul(rr) {
            Some(x) => ri = x,
            None => break,
        }
        i += 1;
    }
    out
}

fn materialize(pieces: &[ApPiece], bound: u64) -> IntSet {
    let mut v: Vec<u64> = Vec::new();
    if bound > 0 {
        v.push(0);
    }
    for p in pieces {
        v.extend((0..p.len).map(|k| p.start + p.step * k));
    }
    v.sort_unstable();
    v.dedup();
    IntSet::from_sorted(v, bound)
}

pub fn counterexample_parts(r: Radix, s: Radix, bound: u64) -> CounterexampleParts {
    CounterexampleParts { bound, a_pieces: pieces(r, bound), b_pieces: pieces(s, bound) }
}

/// `(A ∩ [0, bound), B ∩ [0, bound))`.
pub fn counterexample_pair(r: Radix, s: Radix, bound: u64) -> (IntSet, IntSet) {
    let parts = counterexample_parts(r, s, bound);
    (materialize(&parts.a_pieces, bound), materialize(&parts.b_pieces, bound))
}

struct Bitset {
    words: Vec<u64>,
    len: u64,
}

impl Bitset {
    fn new(len: u64) -> Bitset {
        Bitset { words: vec![0; len.div_ceil(64) as usize], len }
    }

    fn set(&mut self, i: u64) {
        self.words[(i >> 6) as usize] |= 1u64 << (i & 63);
    }

    /// Sets `[lo, hi]`, clipped to the bitset.
    fn set_range(&mut self, lo: u64, hi: u64) {
        if lo >= self.len {
            return;
        }
        let hi = hi.min(self.len - 1);
        let (wl, wh) = ((lo >> 6) as usize, (hi >> 6) as usize);
        let ml = !0u64 << (lo & 63);
        let mh = !0u64 >> (63 - (hi & 63));
        if wl == wh {
            self.words[wl] |= ml & mh;
            return;
        }
        self.words[wl] |= ml;
        for w in &mut self.words[wl + 1..wh] {
            *w = !0;
        }
        self.words[wh] |= mh;
    }

    fn set_ap(&mut self, start: u64, step: u64, len: u64) {
        if len == 0 || start >= self.len {
            return;
        }
        if step == 1 {
            self.set_range(start, start + len - 1);
            return;
        }
        let fit = ((self.len - 1 - start) / step + 1).min(len);
        let mut x = start;
        for _ in 0..fit {
            self.set(x);
            x += step;
        }
    }

    fn count_below(&self, x: u64) -> u64 {
        let x = x.min(self.len);
        let full = (x >> 6) as usize;
        let mut c: u64 = self.words[..full].iter().map(|w| w.count_ones() as u64).sum();
        if x & 63 != 0 {
            c += (self.words[full] & ((1u64 << (x & 63)) - 1)).count_ones() as u64;
        }
        c
    }
}

/// Writes `P + Q` into `bits`.
fn fill_sum(bits: &mut Bitset, p: ApPiece, q: ApPiece) {
    let c = p.start + q.start;
    if c >= bits.len {
        return;
    }
    // Orient so that the inner progression is contiguous when either one is.
    let (p, q) = if q.step == 1 && p.step != 1 { (q, p) } else { (p, q) };
    let (u, k_len, v, q_len) = (p.step, p.len, q.step, q.len);
    if u == 1 {
        if v <= k_len {
            bits.set_range(c, c + v * (q_len - 1) + k_len - 1);
        } else {
            for j in 0..q_len {
                let lo = c + v * j;
                if lo >= bits.len {
                    break;
                }
                bits.set_range(lo, lo + k_len - 1);
            }
        }
        return;
    }
    // Group the outer index by its class modulo u: within the class of q0 the
    // sums are c + v·q0 + u·(k + v·t), a run in quotient coordinates that
    // closes up whenever v ≤ k_len.
    for q0 in 0..u.min(q_len) {
        let t_count = (q_len - q0).div_ceil(u);
        let base = c + v * q0;
        if base >= bits.len {
            break;
        }
        if v <= k_len {
            bits.set_ap(base, u, v * (t_count - 1) + k_len);
        } else {
            for t in 0..t_count {
                let s = base + v * u * t;
                if s >= bits.len {
                    break;
                }
                bits.set_ap(s, u, k_len);
            }
        }
    }
}

/// `|(A + B) ∩ [0, r^N)|` for `N = 0..=n_max`.
pub fn counterexample_sumset_counts(r: Radix, s: Radix, n_max: u32) -> Result<Vec<u64>, IntSetError> {
    let window = r.checked_pow_u64(n_max).filter(|&w| w <= 1 << 34);
    let Some(window) = window else {
        return Err(IntSetError::BoundTooLarge(u64::MAX));
    };
    let parts = counterexample_parts(r, s, window);
    let zero = ApPiece { start: 0, step: 1, len: 1 };
    let mut a = parts.a_pieces;
    a.push(zero);
    let mut b = parts.b_pieces;
    b.push(zero);
    let mut bits = Bitset::new(window);
    for &p in &a {
        for &q in &b {
            fill_sum(&mut bits, p, q);
        }
    }
    Ok((0..=n_max).map(|n| bits.count_below(r.checked_pow_u64(n).unwrap())).collect())
}

/// `r^{N/2} ≤ count ≤ (N+1)²(r^{(N+1)/2} + 1)`, decided in integers.
pub fn mass_bracket_holds(r: Radix, n: u32, count: u64) -> bool {
    let c = BigUint::from(count);
    let rn: BigUint = r.pow(n as u64);
    if &c * &c < rn {
        return false;
    }
    let m = BigUint::from((n as u64 + 1) * (n as u64 + 1));
    if c <= m {
        return true;
    }
    // count/m − 1 ≤ r^{(N+1)/2}  ⟺  (count − m)² ≤ m² r^{N+1}
    let d = &c - &m;
    let rhs: BigUint = &m * &m * r.pow::<BigUint>(n as u64 + 1);
    &d * &d <= rhs
}

/// `count ≤ 4N⁴ r^{4N/5}`, decided as `count⁵ ≤ 4⁵ N^{20} r^{4N}`.
pub fn sumset_bound_holds(r: Radix, n: u32, count: u64) -> bool {
    let c = BigUint::from(count);
    let lhs = c.pow(5);
    let rhs = BigUint::from(1024u32) * BigUint::from(n).pow(20) * r.pow::<BigUint>(4 * n as u64);
    lhs <= rhs
}

/// `rA ⊆ A` on the truncation.
pub fn closed_under_multiplication(a: &IntSet, r: Radix) -> bool {
    let rr = r.get() as u64;
    a.elements()
        .iter()
        .all(|&x| match x.checked_mul(rr) {
            Some(y) if y < a.bound() => a.contains(y),
            _ => true,
        })
}

/// `Φ_r(A) = A` on the truncation: images land in `A`, and every element
/// below `bound/r` has a preimage, which then lies inside the truncation.
pub fn phi_fixed(a: &IntSet, r: Radix) -> bool {
    let rr = r.get() as u64;
    let inside = a.elements().iter().all(|&x| a.contains(x / rr));
    let limit = a.bound() / rr;
    let onto = a.elements().iter().take_while(|&&x| x < limit).all(|&x| {
        let lo = x * rr;
        let k = a.count_below(lo);
        a.elements().get(k).is_some_and(|&y| y < lo + rr)
    });
    inside && onto
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intset::sumset;

    fn r(x: u32) -> Radix {
        Radix::new(x).unwrap()
    }

    #[test]
    fn pieces_match_definition() {
        let (a, _) = counterexample_pair(r(2), r(3), 64);
        // I_0 = [1, 2], I_1 = [2, 4], I_2 = [4, 6], I_3 = [8, 12], I_4 = [16, 21], I_5 = [32, 40]
        let mut want = alloc::collections::BTreeSet::new();
        want.insert(0u64);
        for (lo, hi) in [(1u64, 2u64), (2, 4), (4, 6), (8, 12), (16, 21), (32, 40)] {
            let mut scale = 1;
            while lo * scale < 64 {
                for x in lo..=hi {
                    if x * scale < 64 {
                        want.insert(x * scale);
                    }
                }
                scale *= 2;
            }
        }
        assert_eq!(a.elements(), want.into_iter().collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn fast_sumset_matches_pairwise() {
        for (rr, ss, n) in [(2u32, 3u32, 16u32), (2, 5, 14), (3, 4, 9)] {
            let counts = counterexample_sumset_counts(r(rr), r(ss), n).unwrap();
            let w = (rr as u64).pow(n);
            let (a, b) = counterexample_pair(r(rr), r(ss), w);
            let direct = sumset(&a, &b, w).unwrap();
            for k in 0..=n {
                assert_eq!(counts[k as usize], direct.count_below((rr as u64).pow(k)) as u64);
            }
        }
    }

    #[test]
    fn structural_properties() {
        let (a, b) = counterexample_pair(r(2), r(3), 1 << 20);
        assert!(closed_under_multiplication(&a, r(2)));
        assert!(closed_under_multiplication(&b, r(3)));
        assert!(phi_fixed(&a, r(2)));
        assert!(phi_fixed(&b, r(3)));
        for n in 1..=20 {
            assert!(mass_bracket_holds(r(2), n, a.count_below(1 << n) as u64), "N={n}");
        }
    }

    #[test]
    fn bound_checks_are_exact() {
        assert!(sumset_bound_holds(r(2), 5, 4 * 625 * 16));
        assert!(!sumset_bound_holds(r(2), 5, 4 * 625 * 16 + 1));
        assert!(mass_bracket_holds(r(2), 2, 2));
        assert!(!mass_bracket_holds(r(2), 2, 1));
    }
}
