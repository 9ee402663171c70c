//! Outward-rounded `f64` intervals.
//!
//! Arithmetic uses error-free transforms to detect whether a rounded result is
//! exact; only inexact endpoints are pushed out by one ulp. Transcendental
//! functions are pushed out by two ulps, which covers libm's documented error.
//! Every pass/fail comparison that feeds a verdict goes through these bounds.

use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

fn down(x: f64) -> f64 {
    if x.is_nan() { f64::NEG_INFINITY } else { x.next_down() }
}

fn up(x: f64) -> f64 {
    if x.is_nan() { f64::INFINITY } else { x.next_up() }
}

// Rounded sum and the sign of the rounding error (true − rounded).
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, 0.0);
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() { if s.is_nan() { f64::NEG_INFINITY } else { s } } else if e < 0.0 { down(s) } else { s }
}

fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() { if s.is_nan() { f64::INFINITY } else { s } } else if e > 0.0 { up(s) } else { s }
}

// Tiny products can lose bits to underflow, where fma no longer certifies
// exactness; those are widened unconditionally.
const TINY: f64 = 1e-290;

fn mul_err(a: f64, b: f64) -> (f64, f64, bool) {
    let p = a * b;
    if !p.is_finite() || a == 0.0 || b == 0.0 {
        return (p, 0.0, true);
    }
    if p.abs() < TINY {
        return (p, 0.0, false);
    }
    (p, libm::fma(a, b, -p), true)
}

fn mul_down(a: f64, b: f64) -> f64 {
    match mul_err(a, b) {
        (p, _, false) => down(p),
        (p, e, true) if e < 0.0 => down(p),
        (p, _, true) => if p.is_nan() { f64::NEG_INFINITY } else { p },
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    match mul_err(a, b) {
        (p, _, false) => up(p),
        (p, e, true) if e > 0.0 => up(p),
        (p, _, true) => if p.is_nan() { f64::INFINITY } else { p },
    }
}

// Sign of (a/b − q) given the exact remainder a − q·b.
fn div_err(a: f64, b: f64) -> (f64, f64, bool) {
    let q = a / b;
    if !q.is_finite() || a == 0.0 {
        return (q, 0.0, true);
    }
    if q.abs() < TINY {
        return (q, 0.0, false);
    }
    let r = libm::fma(-q, b, a);
    (q, if b > 0.0 { r } else { -r }, true)
}

fn div_down(a: f64, b: f64) -> f64 {
    match div_err(a, b) {
        (q, _, false) => down(q),
        (q, e, true) if e < 0.0 => down(q),
        (q, _, true) => if q.is_nan() { f64::NEG_INFINITY } else { q },
    }
}

fn div_up(a: f64, b: f64) -> f64 {
    match div_err(a, b) {
        (q, _, false) => up(q),
        (q, e, true) if e > 0.0 => up(q),
        (q, _, true) => if q.is_nan() { f64::INFINITY } else { q },
    }
}

fn widen2(lo: f64, hi: f64) -> Interval {
    Interval { lo: down(down(lo)), hi: up(up(hi)) }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    /// Enclosure of `p/q`.
    pub fn ratio(p: f64, q: f64) -> Interval {
        Interval { lo: div_down(p, q), hi: div_up(p, q) }
    }

    /// Enclosure of a non-negative integer given as `u128`.
    pub fn from_u128(n: u128) -> Interval {
        let x = n as f64;
        if x as u128 == n {
            Interval::point(x)
        } else {
            Interval { lo: down(x), hi: up(x) }
        }
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn mid(self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(self, other: Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn min(self, other: Interval) -> Interval {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.min(other.hi) }
    }

    pub fn max(self, other: Interval) -> Interval {
        Interval { lo: self.lo.max(other.lo), hi: self.hi.max(other.hi) }
    }

    /// `Less`/`Greater` only when the order of every pair of members agrees.
    pub fn certain_cmp(self, other: Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.lo == self.hi && other.lo == other.hi && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Every member of `self` is `≤` every member of `other`.
    pub fn certainly_le(self, other: Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn certainly_lt(self, other: Interval) -> bool {
        self.hi < other.lo
    }

    pub fn abs(self) -> Interval {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Interval { lo: 0.0, hi: (-self.lo).max(self.hi) }
        }
    }

    pub fn exp(self) -> Interval {
        let lo = if self.lo == 0.0 { 1.0 } else { down(down(libm::exp(self.lo))).max(0.0) };
        let hi = if self.hi == 0.0 { 1.0 } else { up(up(libm::exp(self.hi))) };
        Interval { lo, hi }
    }

    /// Natural log; requires a positive lower bound. `ln 1 = 0` is kept exact.
    pub fn ln(self) -> Interval {
        assert!(self.lo > 0.0, "log of non-positive interval");
        let lo = if self.lo == 1.0 { 0.0 } else { down(down(libm::log(self.lo))) };
        let hi = if self.hi == 1.0 { 0.0 } else { up(up(libm::log(self.hi))) };
        Interval { lo, hi }
    }

    /// `self^y` for a positive base and an exactly known exponent.
    pub fn powf(self, y: f64) -> Interval {
        assert!(self.lo > 0.0, "power of non-positive interval");
        if y == 0.0 {
            return Interval::point(1.0);
        }
        if y == 1.0 {
            return self;
        }
        let a = libm::pow(self.lo, y);
        let b = libm::pow(self.hi, y);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let mut out = widen2(lo, hi);
        // Exact powers of one stay exact.
        if self.lo == 1.0 && self.hi == 1.0 {
            out = Interval::point(1.0);
        }
        out.lo = out.lo.max(0.0);
        out
    }

    /// `self^y` where the exponent is itself only known as an interval.
    pub fn powi_interval(self, y: Interval) -> Interval {
        (self.ln() * y).exp()
    }

    pub fn sqrt(self) -> Interval {
        assert!(self.lo >= 0.0, "sqrt of negative interval");
        let lo = libm::sqrt(self.lo);
        let hi = libm::sqrt(self.hi);
        // sqrt is correctly rounded, so an endpoint is exact iff it squares back.
        let exact = |r: f64, x: f64| matches!(mul_err(r, r), (p, e, true) if p == x && e == 0.0);
        let lo = if exact(lo, self.lo) { lo } else { down(lo).max(0.0) };
        let hi = if exact(hi, self.hi) { hi } else { up(hi) };
        Interval { lo, hi }
    }

    pub fn cos(self) -> Interval {
        // Only used on short intervals; evaluate endpoints and add the
        // interior extremum when one is straddled.
        let mut lo = libm::cos(self.lo).min(libm::cos(self.hi));
        let mut hi = libm::cos(self.lo).max(libm::cos(self.hi));
        let k_lo = libm::ceil(self.lo / core::f64::consts::PI);
        let k_hi = libm::floor(self.hi / core::f64::consts::PI);
        let mut k = k_lo;
        while k <= k_hi {
            if (k as i64).rem_euclid(2) == 0 { hi = 1.0 } else { lo = -1.0 }
            k += 1.0;
        }
        let w = widen2(lo, hi);
        Interval { lo: w.lo.max(-1.0), hi: w.hi.min(1.0) }
    }

    pub fn sin(self) -> Interval {
        let half_pi = Interval::point(core::f64::consts::FRAC_PI_2).widen_ulps(1);
        (self - half_pi).cos()
    }

    pub fn widen_ulps(self, k: u32) -> Interval {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for _ in 0..k {
            lo = down(lo);
            hi = up(hi);
        }
        Interval { lo, hi }
    }

    /// Adds absolute slack `e ≥ 0` on both sides.
    pub fn inflate(self, e: f64) -> Interval {
        Interval { lo: add_down(self.lo, -e), hi: add_up(self.hi, e) }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval { lo: add_down(self.lo, o.lo), hi: add_up(self.hi, o.hi) }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, o: Interval) -> Interval {
        Interval { lo: add_down(self.lo, -o.hi), hi: add_up(self.hi, -o.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in c {
            lo = lo.min(mul_down(a, b));
            hi = hi.max(mul_up(a, b));
        }
        Interval { lo, hi }
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, o: Interval) -> Interval {
        assert!(o.lo > 0.0 || o.hi < 0.0, "division by an interval containing zero");
        let c = [(self.lo, o.lo), (self.lo, o.hi), (self.hi, o.lo), (self.hi, o.hi)];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in c {
            lo = lo.min(div_down(a, b));
            hi = hi.max(div_up(a, b));
        }
        Interval { lo, hi }
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Interval {
        Interval::point(x)
    }
}
