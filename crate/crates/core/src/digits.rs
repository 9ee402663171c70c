//! Exact base-r digit arithmetic.
//!
//! Everything here works on any [`Natural`] (`u64`, `u128`, `BigUint`), and the
//! exponent comparisons never go through floating point logs.

use alloc::vec::Vec;
use core::fmt;
use core::ops::{Div, Mul, Rem};

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Integer types the digit maps are defined on.
pub trait Natural:
    Clone + Ord + Zero + One + From<u32> + Div<Output = Self> + Rem<Output = Self> + Mul<Output = Self>
{
}

impl<T> Natural for T where
    T: Clone
        + Ord
        + Zero
        + One
        + From<u32>
        + Div<Output = T>
        + Rem<Output = T>
        + Mul<Output = T>
{
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Radix(u32);

impl Radix {
    pub fn new(r: u32) -> Result<Radix, DigitError> {
        if r < 2 {
            return Err(DigitError::RadixTooSmall(r));
        }
        Ok(Radix(r))
    }

    pub const fn get(self) -> u32 {
        self.0
    }

    /// `r^k` as the requested integer type.
    pub fn pow<T: Natural>(self, k: u64) -> T {
        let mut acc = T::one();
        let mut base = T::from(self.0);
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// `r^k` as a `u64`, or `None` on overflow.
    pub fn checked_pow_u64(self, k: u32) -> Option<u64> {
        (self.0 as u64).checked_pow(k)
    }
}

impl fmt::Display for Radix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DigitError {
    RadixTooSmall(u32),
    DigitOutOfRange { digit: u32, radix: u32 },
    LogOfZero,
}

impl fmt::Display for DigitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitError::RadixTooSmall(r) => write!(f, "radix {r} is smaller than 2"),
            DigitError::DigitOutOfRange { digit, radix } => {
                write!(f, "digit {digit} out of range for radix {radix}")
            }
            DigitError::LogOfZero => write!(f, "floor_log of zero is undefined"),
        }
    }
}

/// Deletes the least significant digit: `⌊n/r⌋`.
pub fn phi<T: Natural>(n: &T, r: Radix) -> T {
    n.clone() / T::from(r.0)
}

/// Deletes the most significant digit. `psi(0) = 0`.
pub fn psi<T: Natural>(n: &T, r: Radix) -> T {
    if n.is_zero() {
        return T::zero();
    }
    let k = floor_log_nonzero(n, r);
    n.clone() % r.pow::<T>(k)
}

/// The unique `k` with `r^k ≤ n < r^{k+1}`.
pub fn floor_log<T: Natural>(n: &T, r: Radix) -> Result<u64, DigitError> {
    if n.is_zero() {
        return Err(DigitError::LogOfZero);
    }
    Ok(floor_log_nonzero(n, r))
}

fn floor_log_nonzero<T: Natural>(n: &T, r: Radix) -> u64 {
    let rr = T::from(r.0);
    let mut m = n.clone();
    let mut k = 0;
    while m >= rr {
        m = m / rr.clone();
        k += 1;
    }
    k
}

/// Number of base-r digits of `n` (`0` has one digit).
pub fn digit_len<T: Natural>(n: &T, r: Radix) -> u64 {
    if n.is_zero() {
        1
    } else {
        floor_log_nonzero(n, r) + 1
    }
}

/// Greatest `k` with `s^k ≤ r^n`, decided by exact big-integer comparison.
///
/// A float estimate picks the starting point; the exact comparison corrects it.
pub fn n_prime(n: u64, r: Radix, s: Radix) -> u64 {
    if n == 0 {
        return 0;
    }
    let target: BigUint = r.pow(n);
    let est = (n as f64) * libm::log(r.0 as f64) / libm::log(s.0 as f64);
    let mut k = if est.is_finite() && est > 1.0 { est as u64 - 1 } else { 0 };
    let mut sk: BigUint = s.pow(k);
    while sk > target {
        k -= 1;
        sk = s.pow(k);
    }
    let sb = BigUint::from(s.0);
    loop {
        let next = &sk * &sb;
        if next > target {
            return k;
        }
        sk = next;
        k += 1;
    }
}

/// A finite digit word. `digits[0]` is the first entry of the word; the
/// little-endian value treats it as the units digit, the big-endian value as
/// the leading digit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DigitWord {
    digits: Vec<u32>,
    radix: Radix,
}

impl DigitWord {
    pub fn new(digits: Vec<u32>, radix: Radix) -> Result<DigitWord, DigitError> {
        if let Some(&d) = digits.iter().find(|&&d| d >= radix.0) {
            return Err(DigitError::DigitOutOfRange { digit: d, radix: radix.0 });
        }
        Ok(DigitWord { digits, radix })
    }

    pub fn empty(radix: Radix) -> DigitWord {
        DigitWord { digits: Vec::new(), radix }
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// `(w)_r = w_0 r^{ℓ-1} + … + w_{ℓ-1}`.
    pub fn big_endian_value<T: Natural>(&self) -> T {
        let r = T::from(self.radix.0);
        self.digits
            .iter()
            .fold(T::zero(), |acc, &d| acc * r.clone() + T::from(d))
    }

    /// Same digits in the opposite order.
    pub fn reversed(&self) -> DigitWord {
        let mut digits = self.digits.clone();
        digits.reverse();
        DigitWord { digits, radix: self.radix }
    }
}

/// Little-endian digits of `n`; `0` becomes the single digit `0`.
pub fn to_digits<T: Natural>(n: &T, r: Radix) -> DigitWord {
    let rr = T::from(r.0);
    let mut digits = Vec::new();
    let mut m = n.clone();
    loop {
        let d = m.clone() % rr.clone();
        digits.push(small_value(&d));
        m = m / rr.clone();
        if m.is_zero() {
            break;
        }
    }
    DigitWord { digits, radix: r }
}

/// Big-endian digits of `n` (leading digit first).
pub fn to_digits_big_endian<T: Natural>(n: &T, r: Radix) -> DigitWord {
    to_digits(n, r).reversed()
}

/// `w_0 + w_1 r + …`; the empty word is `0`.
pub fn from_digits<T: Natural>(w: &DigitWord) -> T {
    let r = T::from(w.radix.0);
    w.digits
        .iter()
        .rev()
        .fold(T::zero(), |acc, &d| acc * r.clone() + T::from(d))
}

// Binary search over u32 so this works for any Natural without a ToPrimitive bound.
fn small_value<T: Natural>(d: &T) -> u32 {
    let mut lo = 0u32;
    let mut hi = u32::MAX;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if T::from(mid) < *d {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Whether `n = (w)_r·r^d + n_0` for some `d ≥ 0` and `0 ≤ n_0 < r^d`.
///
/// Leading zeros in `w` are taken literally, so `(0,1)` behaves like `(1)`.
pub fn begins_with<T: Natural>(n: &T, w: &DigitWord, r: Radix) -> bool {
    let v: T = DigitWord { digits: w.digits.clone(), radix: r }.big_endian_value();
    if v.is_zero() {
        // (w)_r = 0: take d large enough that n < r^d.
        return true;
    }
    if *n < v {
        return false;
    }
    // The windows [v r^d, (v+1) r^d) are disjoint and increasing in d, so only
    // the largest d with v r^d ≤ n can work.
    let d = floor_log_nonzero(&(n.clone() / v.clone()), r);
    let scale: T = r.pow(d);
    *n < (v + T::one()) * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn r(x: u32) -> Radix {
        Radix::new(x).unwrap()
    }

    #[test]
    fn worked_example() {
        assert_eq!(phi(&71393u64, r(10)), 7139);
        assert_eq!(psi(&71393u64, r(10)), 1393);
        assert_eq!(phi(&0u64, r(2)), 0);
        assert_eq!(psi(&0u64, r(2)), 0);
        assert_eq!(phi(&26u64, r(3)), 8);
        assert_eq!(psi(&5u64, r(2)), 1);
        for d in 0..7u64 {
            assert_eq!(psi(&d, r(7)), 0);
        }
    }

    #[test]
    fn floor_log_cases() {
        assert_eq!(floor_log(&71393u64, r(10)), Ok(4));
        assert_eq!(floor_log(&1u64, r(7)), Ok(0));
        let p: BigUint = r(3).pow(40);
        assert_eq!(floor_log(&p, r(3)), Ok(40));
        assert_eq!(floor_log(&(p - 1u32), r(3)), Ok(39));
        assert_eq!(floor_log(&0u64, r(3)), Err(DigitError::LogOfZero));
    }

    #[test]
    fn n_prime_cases() {
        assert_eq!(n_prime(0, r(2), r(3)), 0);
        assert_eq!(n_prime(5, r(2), r(3)), 3);
        assert_eq!(n_prime(100, r(2), r(3)), 63);
        assert_eq!(n_prime(3, r(3), r(3)), 3);
        assert_eq!(n_prime(4, r(10), r(2)), 13);
    }

    #[test]
    fn digit_words() {
        let w = to_digits(&71393u64, r(10));
        assert_eq!(w.digits(), &[3, 9, 3, 1, 7]);
        assert_eq!(from_digits::<u64>(&w), 71393);
        assert_eq!(from_digits::<u64>(&DigitWord::empty(r(10))), 0);
        let be = DigitWord::new(vec![7, 1], r(10)).unwrap();
        assert_eq!(be.big_endian_value::<u64>(), 71);
        assert!(DigitWord::new(vec![2], r(2)).is_err());
        assert_eq!(to_digits(&0u64, r(5)).digits(), &[0]);
    }

    #[test]
    fn prefixes() {
        let w = |d: &[u32], b: u32| DigitWord::new(d.to_vec(), r(b)).unwrap();
        assert!(begins_with(&71393u64, &w(&[7, 1], 10), r(10)));
        assert!(begins_with(&5u64, &w(&[1, 0, 1], 2), r(2)));
        assert!(!begins_with(&6u64, &w(&[1, 0, 1], 2), r(2)));
        assert!(begins_with(&3u64, &w(&[0, 1], 2), r(2)));
        assert!(begins_with(&0u64, &w(&[], 2), r(2)));
        assert!(!begins_with(&0u64, &w(&[1], 2), r(2)));
        assert!(!begins_with(&70999u64, &w(&[7, 1], 10), r(10)));
        assert!(begins_with(&71u64, &w(&[7, 1], 10), r(10)));
    }

    #[test]
    fn big_integers() {
        let n: BigUint = r(10).pow::<BigUint>(30) * 7u32 + 12345u32;
        assert_eq!(psi(&n, r(10)), BigUint::from(12345u32));
        assert_eq!(phi(&n, r(10)), r(10).pow::<BigUint>(29) * 7u32 + 1234u32);
    }
}
