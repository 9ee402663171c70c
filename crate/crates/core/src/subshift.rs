//! One-sided subshifts over `{0,…,r−1}` given by labeled graphs.
//!
//! A presentation is deterministic on `(state, digit)` and trimmed, and every
//! state is initial, so a finite word is in the language iff it can be read
//! from some state. Counting goes through the subset automaton started from the
//! set of all states; counting paths in the presentation itself would count a
//! word once per state that reads it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::digits::{DigitWord, Radix};
use crate::intset::IntSet;
use crate::stats;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SubshiftError {
    Empty,
    DigitOutOfRange { digit: u32, radix: u32 },
    EmptyForbiddenWord,
    GapCapTooSmall(usize),
    TooManyStates(usize),
}

impl fmt::Display for SubshiftError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubshiftError::Empty => write!(f, "the subshift is empty"),
            SubshiftError::DigitOutOfRange { digit, radix } => {
                write!(f, "digit {digit} out of range for radix {radix}")
            }
            SubshiftError::EmptyForbiddenWord => write!(f, "forbidding the empty word"),
            SubshiftError::GapCapTooSmall(g) => write!(f, "gap cap {g} is below 2"),
            SubshiftError::TooManyStates(n) => write!(f, "presentation needs {n} states"),
        }
    }
}

const MAX_STATES: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subshift {
    radix: Radix,
    // delta[state][digit]
    delta: Vec<Vec<Option<usize>>>,
}

/// Square matrix of edge counts between states of a deterministic automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferMatrix {
    pub entries: Vec<Vec<u64>>,
}

impl TransferMatrix {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    /// `v ↦ vM` in exact arithmetic.
    pub fn apply(&self, v: &[BigUint]) -> Vec<BigUint> {
        let n = self.dim();
        let mut out = vec![BigUint::zero(); n];
        for (i, row) in self.entries.iter().enumerate() {
            if v[i].is_zero() {
                continue;
            }
            for (j, &c) in row.iter().enumerate() {
                if c != 0 {
                    out[j] += &v[i] * c;
                }
            }
        }
        out
    }

    /// Perron root by power iteration on `M + I`, which is aperiodic whenever
    /// `M` is irreducible, so the iteration converges even for periodic graphs.
    pub fn spectral_radius(&self, iterations: usize) -> f64 {
        let n = self.dim();
        if n == 0 {
            return 0.0;
        }
        let mut v = vec![1.0f64; n];
        let mut lambda = 0.0;
        for _ in 0..iterations {
            let mut w = v.clone();
            for (i, row) in self.entries.iter().enumerate() {
                for (j, &c) in row.iter().enumerate() {
                    if c != 0 {
                        w[j] += v[i] * c as f64;
                    }
                }
            }
            let norm: f64 = w.iter().sum();
            let prev: f64 = v.iter().sum();
            if norm == 0.0 {
                return 0.0;
            }
            lambda = norm / prev - 1.0;
            for x in w.iter_mut() {
                *x /= norm;
            }
            v = w;
        }
        lambda
    }
}

/// Entropy of a subshift, normalized by `log r`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    /// Least-squares slope of `N ↦ log_r |L_N|` over the top half of levels.
    pub counting_slope: f64,
    /// `log_r` of the dominant eigenvalue of the word-counting automaton.
    pub spectral: f64,
    /// `(N, log_r |L_N|)` for `N = 1..=N_max`.
    pub levels: Vec<(usize, f64)>,
}

/// Deterministic automaton over sets of presentation states, started from the
/// set of all states. Its paths from `start` are in bijection with the words of
/// the language.
#[derive(Clone, Debug)]
pub struct WordAutomaton {
    pub radix: Radix,
    pub start: usize,
    pub delta: Vec<Vec<Option<usize>>>,
}

impl WordAutomaton {
    pub fn transfer_matrix(&self) -> TransferMatrix {
        let n = self.delta.len();
        let mut entries = vec![vec![0u64; n]; n];
        for (i, row) in self.delta.iter().enumerate() {
            for t in row.iter().flatten() {
                entries[i][*t] += 1;
            }
        }
        TransferMatrix { entries }
    }

    pub fn step(&self, state: usize, digit: u32) -> Option<usize> {
        self.delta[state][digit as usize]
    }

    pub fn accepts(&self, word: &[u32]) -> bool {
        let mut q = self.start;
        for &d in word {
            match self.step(q, d) {
                Some(n) => q = n,
                None => return false,
            }
        }
        true
    }

    /// `|L_N|` for `N = 0..=n_max`.
    pub fn counts(&self, n_max: usize) -> Vec<BigUint> {
        let m = self.transfer_matrix();
        let mut v = vec![BigUint::zero(); m.dim()];
        v[self.start] = BigUint::one();
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(BigUint::one());
        for _ in 0..n_max {
            v = m.apply(&v);
            out.push(v.iter().sum());
        }
        out
    }
}

impl Subshift {
    /// Builds a presentation from a raw transition table, trimming states from
    /// which no infinite path leaves.
    pub fn from_transitions(
        radix: Radix,
        delta: Vec<Vec<Option<usize>>>,
    ) -> Result<Subshift, SubshiftError> {
        let r = radix.get() as usize;
        let n = delta.len();
        let mut alive = vec![true; n];
        loop {
            let mut changed = false;
            for q in 0..n {
                if alive[q] && !delta[q].iter().flatten().any(|&t| alive[t]) {
                    alive[q] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let mut index = vec![usize::MAX; n];
        let mut k = 0;
        for q in 0..n {
            if alive[q] {
                index[q] = k;
                k += 1;
            }
        }
        if k == 0 {
            return Err(SubshiftError::Empty);
        }
        let mut out = Vec::with_capacity(k);
        for q in 0..n {
            if !alive[q] {
                continue;
            }
            let mut row = vec![None; r];
            for (d, t) in delta[q].iter().enumerate().take(r) {
                if let Some(t) = *t {
                    if alive[t] {
                        row[d] = Some(index[t]);
                    }
                }
            }
            out.push(row);
        }
        Ok(Subshift { radix, delta: out })
    }

    pub fn radix(&self) -> Radix {
        self.radix
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    /// Edge-count matrix of the presentation itself.
    pub fn presentation_matrix(&self) -> TransferMatrix {
        let n = self.delta.len();
        let mut entries = vec![vec![0u64; n]; n];
        for (i, row) in self.delta.iter().enumerate() {
            for t in row.iter().flatten() {
                entries[i][*t] += 1;
            }
        }
        TransferMatrix { entries }
    }

    /// The subset construction from the set of all states.
    pub fn word_automaton(&self) -> WordAutomaton {
        let r = self.radix.get() as usize;
        let all: BTreeSet<usize> = (0..self.delta.len()).collect();
        let mut ids: BTreeMap<BTreeSet<usize>, usize> = BTreeMap::new();
        let mut sets: Vec<BTreeSet<usize>> = Vec::new();
        let mut delta: Vec<Vec<Option<usize>>> = Vec::new();
        ids.insert(all.clone(), 0);
        sets.push(all);
        let mut i = 0;
        while i < sets.len() {
            let mut row = vec![None; r];
            for (d, slot) in row.iter_mut().enumerate() {
                let next: BTreeSet<usize> =
                    sets[i].iter().filter_map(|&q| self.delta[q][d]).collect();
                if next.is_empty() {
                    continue;
                }
                let id = match ids.get(&next) {
                    Some(&id) => id,
                    None => {
                        let id = sets.len();
                        ids.insert(next.clone(), id);
                        sets.push(next);
                        id
                    }
                };
                *slot = Some(id);
            }
            delta.push(row);
            i += 1;
        }
        WordAutomaton { radix: self.radix, start: 0, delta }
    }

    pub fn contains_word(&self, word: &[u32]) -> bool {
        (0..self.delta.len()).any(|q0| {
            let mut q = q0;
            for &d in word {
                match self.delta[q].get(d as usize).copied().flatten() {
                    Some(n) => q = n,
                    None => return false,
                }
            }
            true
        })
    }

    pub fn language_count(&self, n: usize) -> BigUint {
        self.word_automaton().counts(n).pop().unwrap_or_else(BigUint::one)
    }

    /// All words of length `n`, lexicographic in reading order.
    pub fn words(&self, n: usize) -> Vec<Vec<u32>> {
        let aut = self.word_automaton();
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(n);
        fn go(aut: &WordAutomaton, q: usize, n: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            if cur.len() == n {
                out.push(cur.clone());
                return;
            }
            for d in 0..aut.radix.get() {
                if let Some(t) = aut.step(q, d) {
                    cur.push(d);
                    go(aut, t, n, cur, out);
                    cur.pop();
                }
            }
        }
        go(&aut, aut.start, n, &mut cur, &mut out);
        out
    }

    pub fn entropy(&self, n_max: usize) -> EntropyEstimate {
        let aut = self.word_automaton();
        let counts = aut.counts(n_max);
        let ln_r = libm::log(self.radix.get() as f64);
        let levels: Vec<(usize, f64)> = (1..=n_max)
            .map(|n| (n, stats::ln_big(&counts[n]) / ln_r))
            .collect();
        let start = stats::top_half_start(levels.len());
        let xs: Vec<f64> = levels[start..].iter().map(|&(n, _)| n as f64).collect();
        let ys: Vec<f64> = levels[start..].iter().map(|&(_, y)| y).collect();
        let counting_slope = match stats::least_squares(&xs, &ys) {
            Some((slope, _)) => slope,
            None => levels.last().map(|&(n, y)| y / n as f64).unwrap_or(0.0),
        };
        let lambda = aut.transfer_matrix().spectral_radius(2000);
        let spectral = if lambda > 0.0 { libm::log(lambda) / ln_r } else { 0.0 };
        EntropyEstimate { counting_slope, spectral, levels }
    }

    /// `A_Σ ∩ [0, bound)`: zero together with every integer whose canonical
    /// little-endian digit word lies in the language.
    pub fn embed(&self, bound: u64) -> IntSet {
        let aut = self.word_automaton();
        let r = self.radix.get() as u64;
        let mut out = Vec::new();
        if bound > 0 {
            out.push(0);
        }
        // (state, value so far, r^depth)
        let mut stack: Vec<(usize, u64, u64)> = vec![(aut.start, 0, 1)];
        while let Some((q, v, scale)) = stack.pop() {
            for d in 0..r as u32 {
                let Some(t) = aut.step(q, d) else { continue };
                let Some(add) = scale.checked_mul(d as u64) else { continue };
                let Some(nv) = v.checked_add(add) else { continue };
                if d != 0 {
                    if nv >= bound {
                        continue;
                    }
                    out.push(nv);
                }
                if let Some(ns) = scale.checked_mul(r) {
                    if ns < bound {
                        stack.push((t, nv, ns));
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        IntSet::from_sorted(out, bound)
    }
}

/// Subshift of finite type: words with no factor from `forbidden`.
///
/// States are the admissible words of length below `ℓ` (the longest forbidden
/// length), truncated to their last `ℓ−1` digits. Keeping the short words
/// as states matters for one-sided shifts: a word that cannot be preceded by
/// anything must still be readable from somewhere.
pub fn sft_from_forbidden(radix: Radix, forbidden: &[DigitWord]) -> Result<Subshift, SubshiftError> {
    let r = radix.get() as usize;
    for w in forbidden {
        if w.is_empty() {
            return Err(SubshiftError::EmptyForbiddenWord);
        }
        if let Some(&d) = w.digits().iter().find(|&&d| d >= radix.get()) {
            return Err(SubshiftError::DigitOutOfRange { digit: d, radix: radix.get() });
        }
    }
    let ell = forbidden.iter().map(|w| w.len()).max().unwrap_or(1);
    let window = ell - 1;
    let mut total = 0usize;
    let mut p = 1usize;
    for _ in 0..=window {
        total = total.saturating_add(p);
        p = p.saturating_mul(r);
    }
    if total > MAX_STATES {
        return Err(SubshiftError::TooManyStates(total));
    }
    let bad = |word: &[u32]| {
        forbidden.iter().any(|f| {
            let f = f.digits();
            f.len() <= word.len() && &word[word.len() - f.len()..] == f
        })
    };
    let mut ids: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
    let mut words: Vec<Vec<u32>> = vec![Vec::new()];
    ids.insert(Vec::new(), 0);
    let mut delta: Vec<Vec<Option<usize>>> = Vec::new();
    let mut i = 0;
    while i < words.len() {
        let mut row = vec![None; r];
        for (d, slot) in row.iter_mut().enumerate() {
            let mut next = words[i].clone();
            next.push(d as u32);
            if bad(&next) {
                continue;
            }
            if next.len() > window {
                next.remove(0);
            }
            let id = match ids.get(&next) {
                Some(&id) => id,
                None => {
                    let id = words.len();
                    ids.insert(next.clone(), id);
                    words.push(next);
                    id
                }
            };
            *slot = Some(id);
        }
        delta.push(row);
        i += 1;
    }
    Subshift::from_transitions(radix, delta)
}

pub fn full_shift(radix: Radix) -> Subshift {
    let r = radix.get() as usize;
    Subshift { radix, delta: vec![(0..r).map(|_| Some(0)).collect()] }
}

/// Integers whose base-r digits all lie in `allowed`.
pub fn restricted_digits(radix: Radix, allowed: &[u32]) -> Result<Subshift, SubshiftError> {
    let r = radix.get() as usize;
    let mut row = vec![None; r];
    for &d in allowed {
        if d >= radix.get() {
            return Err(SubshiftError::DigitOutOfRange { digit: d, radix: radix.get() });
        }
        row[d as usize] = Some(0);
    }
    Subshift::from_transitions(radix, vec![row])
}

/// Binary words with no two consecutive ones.
pub fn golden_mean() -> Subshift {
    let two = Radix::new(2).unwrap();
    sft_from_forbidden(two, &[DigitWord::new(vec![1, 1], two).unwrap()]).unwrap()
}

/// Binary words in which every run of zeros between two ones has even length.
pub fn even_shift() -> Subshift {
    // 0: even number of zeros since the last one; 1: odd.
    let delta = vec![vec![Some(1), Some(0)], vec![Some(0), None]];
    Subshift::from_transitions(Radix::new(2).unwrap(), delta).unwrap()
}

pub fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Binary words in which every run of zeros between two ones has prime length
/// at most `gap_cap`.
///
/// The untruncated prime-gap shift is not sofic. Capping the gaps gives a
/// sofic subshift of it whose entropy increases to the full one as the cap
/// grows.
pub fn prime_gap_shift(gap_cap: usize) -> Result<Subshift, SubshiftError> {
    if gap_cap < 2 {
        return Err(SubshiftError::GapCapTooSmall(gap_cap));
    }
    // States: 0 = no one seen yet; 1 + k = k zeros since the last one
    // (k ≤ gap_cap); gap_cap + 2 = too many zeros for another one.
    let counting = |k: usize| 1 + k;
    let overflow = gap_cap + 2;
    let mut delta = vec![vec![None, None]; gap_cap + 3];
    delta[0] = vec![Some(0), Some(counting(0))];
    for k in 0..=gap_cap {
        let zero = if k < gap_cap { counting(k + 1) } else { overflow };
        let one = if is_prime(k) { Some(counting(0)) } else { None };
        delta[counting(k)] = vec![Some(zero), one];
    }
    delta[overflow] = vec![Some(overflow), None];
    Subshift::from_transitions(Radix::new(2).unwrap(), delta)
}

/// Parses the fixture text format: a `radix r` line followed by `forbid w`
/// lines (digit strings, one character per digit, radix ≤ 36), or a single
/// named fixture line `golden`, `even`, `primegap G`, `full`, `digits d…`.
pub fn parse_fixture(text: &str) -> Result<Subshift, FixtureError> {
    let mut radix: Option<Radix> = None;
    let mut forbidden: Vec<DigitWord> = Vec::new();
    let mut named: Option<Subshift> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or("");
        let arg = parts.next();
        let err = |msg: &'static str| FixtureError { line: lineno + 1, message: msg };
        match key {
            "radix" => {
                let r: u32 = arg.and_then(|a| a.parse().ok()).ok_or(err("bad radix"))?;
                radix = Some(Radix::new(r).map_err(|_| err("radix below 2"))?);
            }
            "forbid" => {
                let r = radix.ok_or(err("forbid before radix"))?;
                let w = arg.ok_or(err("missing word"))?;
                let digits: Option<Vec<u32>> = w.chars().map(|c| c.to_digit(36)).collect();
                let digits = digits.ok_or(err("bad digit"))?;
                forbidden.push(DigitWord::new(digits, r).map_err(|_| err("digit out of range"))?);
            }
            "golden" => named = Some(golden_mean()),
            "even" => named = Some(even_shift()),
            "full" => named = Some(full_shift(radix.ok_or(err("full before radix"))?)),
            "primegap" => {
                let g: usize = arg.and_then(|a| a.parse().ok()).ok_or(err("bad gap cap"))?;
                named = Some(prime_gap_shift(g).map_err(|_| err("gap cap below 2"))?);
            }
            "digits" => {
                let r = radix.ok_or(err("digits before radix"))?;
                let w = arg.ok_or(err("missing digits"))?;
                let digits: Option<Vec<u32>> = w.chars().map(|c| c.to_digit(36)).collect();
                let digits = digits.ok_or(err("bad digit"))?;
                named = Some(restricted_digits(r, &digits).map_err(|_| err("digit out of range"))?);
            }
            _ => return Err(err("unknown directive")),
        }
    }
    if let Some(s) = named {
        if let Some(r) = radix {
            if r != s.radix() {
                return Err(FixtureError { line: 0, message: "radix does not match named fixture" });
            }
        }
        return Ok(s);
    }
    let r = radix.ok_or(FixtureError { line: 0, message: "missing radix line" })?;
    if forbidden.is_empty() {
        return Ok(full_shift(r));
    }
    sft_from_forbidden(r, &forbidden).map_err(|_| FixtureError { line: 0, message: "empty subshift" })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixtureError {
    pub line: usize,
    pub message: &'static str,
}

impl fmt::Display for FixtureError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}
