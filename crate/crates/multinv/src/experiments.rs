//! One function per experiment kind. Each reads its keys from an
//! [`ExperimentSpec`] and returns a [`Report`]; nothing here touches the
//! filesystem.

use std::collections::BTreeSet;

use num_rational::Ratio;
use rayon::prelude::*;
use serde_json::{json, Value};

use multinv_core::digits::DigitWord;
use multinv_core::intset::{self, DigitMap, IntSet};
use multinv_core::pipeline::{self, PipelineConfig};
use multinv_core::projection::{find_beginning_with, multiplicatively_independent};
use multinv_core::stats;
use multinv_core::Radix;

use crate::fixture::{self, digit_set};
use crate::formats;
use crate::report::{pipeline_json, Report};
use crate::spec::{ExperimentSpec, Kind};
use crate::Error;

/// Band for single-set entropies, whose per-level counts are exact.
pub const SINGLE_SET_TOLERANCE: f64 = 0.01;
/// Band for sumset slopes, which converge slowly.
pub const SUMSET_TOLERANCE: f64 = 0.05;
/// Band for the counterexample's dimension estimates.
pub const COUNTEREXAMPLE_TOLERANCE: f64 = 0.03;
/// Largest `|A|·|B|` a materialized sumset may enumerate.
pub const MAX_PAIRS: u128 = 200_000_000;
/// Largest window a sumset experiment may allocate as a bitset.
pub const MAX_WINDOW: u64 = 1 << 34;

pub fn run(spec: &ExperimentSpec) -> Result<Report, Error> {
    match spec.kind {
        Kind::Dims => dims(spec),
        Kind::SumsetDim => sumset_dim(spec),
        Kind::Counterexample => counterexample(spec),
        Kind::Furstenberg => furstenberg(spec),
        Kind::IteratedSumset => iterated_sumset(spec),
        Kind::DigitIntersection => digit_intersection(spec),
        Kind::Pipeline => pipeline(spec),
    }
}

/// Runs entries on the current rayon pool; results keep spec order.
pub fn run_all(specs: &[ExperimentSpec]) -> Vec<Result<Report, Error>> {
    specs.par_iter().map(run).collect()
}

/// The entries a subcommand runs when no spec file is given.
pub fn defaults(kind: Kind) -> Vec<ExperimentSpec> {
    let e = || ExperimentSpec::new(kind);
    match kind {
        Kind::Dims => vec![
            e().with("fixture", "golden").with("levels", 40).with("expect", 0.6942),
            e().with("fixture", "golden, even").with("levels", 40).with("agree", true),
            e().with("fixture", "primegap:50")
                .with("levels", 40)
                .with("expect", 0.437)
                .with("first", "0,1,2,4,8,9,16,17,18,32,34,36,64,65,68,72,73"),
        ],
        Kind::SumsetDim => vec![
            e().with("a", "digits:4:03").with("b", "digits:5:04").with("ladder", 5).with("levels", 12),
            e().with("a", "digits:10:012")
                .with("b", "digits:10:012")
                .with("ladder", 10)
                .with("levels", 7)
                .with("allow_dependent", true)
                .with("expect", 5f64.log10())
                .with("tolerance", 0.02),
            e().with("a", "digits:4:03")
                .with("b", "digits:5:04")
                .with("lambda", "1/2, 1, 3/2, 2")
                .with("eta", "1/2, 1, 3/2, 2")
                .with("ladder", 5)
                .with("levels", 11),
        ],
        Kind::Counterexample => vec![e().with("r", 2).with("s", 3).with("levels", 30)],
        Kind::Furstenberg => vec![
            e().with("seeds", 5).with("bound", "2^20").with("expect_run", 1000),
            e().with("seeds", 0).with("bound", "2^20").with("expect_closure", 0),
            e().with("seed_fixture", "digits:3:02").with("bound", "2^20").with("prefix_len", 4),
        ],
        Kind::IteratedSumset => vec![
            e().with("fixture", "digits:10:012").with("max_n", 6).with("levels", 6),
            e().with("fixture", "full:10").with("max_n", 2).with("levels", 6),
            e().with("fixture", "digits:10:0").with("max_n", 3).with("levels", 6),
        ],
        Kind::DigitIntersection => vec![
            e().with("bases", "2,3,4,5").with("digits", "0,1").with("bound", "10^7").with("expect", "0,1,82000"),
            e().with("bases", "2,3")
                .with("digits", "0,1")
                .with("bound", 100)
                .with("expect", "0,1,3,4,9,10,12,13,27,28,30,31,36,37,39,40,81,82,84,85,90,91,93,94"),
            e().with("bases", "2").with("digits", "0,1").with("bound", "10^5").with("expect_count", 100000),
        ],
        Kind::Pipeline => vec![e()
            .with("x", "golden")
            .with("y", "digits:3:02")
            .with("m", 4)
            .with("n", 4)
            .with("t", 0)],
    }
}

fn radix(spec: &ExperimentSpec, key: &str, default: u32) -> Result<Radix, Error> {
    let r = spec.parse_or(key, default)?;
    Radix::new(r).map_err(|e| Error::Spec { line: 0, message: format!("{}: key {key:?}: {e}", spec.kind) })
}

fn usage(spec: &ExperimentSpec, message: impl std::fmt::Display) -> Error {
    Error::Spec { line: 0, message: format!("{}: {message}", spec.kind) }
}

fn ln_ratio(count: u64, base: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        (count as f64).ln() / base
    }
}

/// Least-squares slope of `ys` against `1..` over the top half, or the last
/// ratio when there are too few levels.
fn top_slope(ys: &[f64]) -> f64 {
    let start = stats::top_half_start(ys.len());
    let xs: Vec<f64> = (start + 1..=ys.len()).map(|n| n as f64).collect();
    match stats::least_squares(&xs, &ys[start..]) {
        Some((slope, _)) => slope,
        None => ys.last().map(|&y| y / ys.len() as f64).unwrap_or(0.0),
    }
}

/// `H¹_{≥1}` of a sorted set of integers: a ball over a run of consecutive
/// elements costs the run's span, at least 1. Two states suffice: whether the
/// last element sits alone in its ball.
fn h1_content(xs: &[u64]) -> u64 {
    let Some((&first, rest)) = xs.split_first() else { return 0 };
    let (mut alone, mut shared) = (1u64, u64::MAX);
    let mut prev = first;
    for &x in rest {
        let g = x - prev;
        let join = (alone - 1 + g).min(shared.saturating_add(g));
        let split = alone.min(shared) + 1;
        (alone, shared) = (split, join);
        prev = x;
    }
    alone.min(shared)
}

fn dims(spec: &ExperimentSpec) -> Result<Report, Error> {
    spec.check_keys(&["fixture", "levels", "expect", "tolerance", "agree", "first"])?;
    let names: Vec<String> = spec.list("fixture")?.unwrap_or_else(|| vec!["golden".into()]);
    let levels: usize = spec.parse_or("levels", 40)?;
    if levels < 2 {
        return Err(usage(spec, "levels must be at least 2"));
    }
    let tol = spec.parse_or("tolerance", SINGLE_SET_TOLERANCE)?;
    let expect: Option<f64> = spec.parse("expect")?;
    let agree: bool = spec.parse_or("agree", false)?;
    let first: Option<Vec<u64>> = spec.list("first")?;

    let mut rep = Report::new(spec);
    let mut slopes = Vec::new();
    let mut details = Vec::new();
    for name in &names {
        let sigma = fixture::resolve(name)?;
        let r = sigma.radix();
        let counts = sigma.word_automaton().counts(levels);
        let est = sigma.entropy(levels);
        for n in 1..=levels {
            rep.row(name, "r", r, n as u32, &counts[n], est.levels[n - 1].1 / n as f64);
        }
        let slope = est.counting_slope;
        rep.check(
            format!("{name}: counting slope matches the spectral entropy"),
            false,
            (slope - est.spectral).abs() <= tol,
            format!("slope {slope:.6}, spectral {:.6}, tolerance {tol}", est.spectral),
        );
        if let Some(x) = expect {
            rep.check(
                format!("{name}: dimension at level {levels}"),
                false,
                (slope - x).abs() <= tol,
                format!("slope {slope:.6}, expected {x} ± {tol}"),
            );
        }
        if let Some(want) = &first {
            let got = first_elements(&sigma, want.len());
            rep.check(
                format!("{name}: first {} elements", want.len()),
                true,
                &got == want,
                format!("{got:?}"),
            );
        }
        details.push(json!({
            "fixture": name,
            "radix": r.get(),
            "counting_slope": slope,
            "spectral": est.spectral,
            "top_count": counts[levels].to_string(),
        }));
        slopes.push(slope);
    }
    if agree && slopes.len() > 1 {
        let lo = slopes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = slopes.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        rep.check("fixtures share one dimension", false, hi - lo <= tol, format!("spread {:.6}, tolerance {tol}", hi - lo));
    }
    rep.detail("fixtures", Value::Array(details));
    Ok(rep)
}

fn first_elements(sigma: &multinv_core::subshift::Subshift, k: usize) -> Vec<u64> {
    let mut bound = 1024u64;
    loop {
        let a = sigma.embed(bound);
        if a.len() >= k || bound >= 1 << 36 {
            return a.elements().iter().take(k).copied().collect();
        }
        bound *= 4;
    }
}

struct Combo {
    lambda: Ratio<u64>,
    eta: Ratio<u64>,
    sizes: (usize, usize),
    counts: Vec<u64>,
    h1_ratio: Vec<f64>,
    slope: f64,
}

/// Smallest bound `b` with `λx < top` for every `x < b`.
fn preimage_bound(top: u64, l: Ratio<u64>) -> u64 {
    let (p, q) = (*l.numer() as u128, *l.denom() as u128);
    let b = (top as u128 * q).div_ceil(p);
    b.min(u64::MAX as u128) as u64
}

fn sumset_dim(spec: &ExperimentSpec) -> Result<Report, Error> {
    spec.check_keys(&["a", "b", "lambda", "eta", "ladder", "levels", "expect", "tolerance", "allow_dependent"])?;
    let (an, bn) = (spec.require("a")?, spec.require("b")?);
    let (sa, sb) = (fixture::resolve(an)?, fixture::resolve(bn)?);
    let (ra, rb) = (sa.radix(), sb.radix());
    let independent = multiplicatively_independent(ra, rb);
    if !independent && !spec.parse_or("allow_dependent", false)? {
        return Err(usage(spec, format!("bases {ra} and {rb} are multiplicatively dependent (set allow_dependent for a control run)")));
    }
    let one = Ratio::from_integer(1u64);
    let lambdas = spec.ratios("lambda")?.unwrap_or_else(|| vec![one]);
    let etas = spec.ratios("eta")?.unwrap_or_else(|| vec![one]);
    if lambdas.iter().chain(&etas).any(|x| *x.numer() == 0) || lambdas.is_empty() || etas.is_empty() {
        return Err(usage(spec, "λ and η must be positive"));
    }
    let ladder = radix(spec, "ladder", ra.get().max(rb.get()))?;
    let levels: u32 = spec.parse_or("levels", 10)?;
    let top = ladder
        .checked_pow_u64(levels)
        .filter(|&t| t <= MAX_WINDOW && levels >= 2)
        .ok_or_else(|| usage(spec, "ladder^levels must lie in [ladder², 2^34]"))?;
    let tol = spec.parse_or("tolerance", SUMSET_TOLERANCE)?;
    let ln_l = (ladder.get() as f64).ln();

    let combos: Vec<(Ratio<u64>, Ratio<u64>)> =
        lambdas.iter().flat_map(|&l| etas.iter().map(move |&e| (l, e))).collect();
    let results: Vec<Combo> = combos
        .par_iter()
        .map(|&(lambda, eta)| -> Result<Combo, Error> {
            let a = sa.embed(preimage_bound(top, lambda));
            let b = sb.embed(preimage_bound(top, eta));
            if a.len() as u128 * b.len() as u128 > MAX_PAIRS {
                return Err(Error::Core(format!("{} × {} pairs exceed the limit of {MAX_PAIRS}", a.len(), b.len())));
            }
            let c = intset::floor_affine_sumset(&a, &b, lambda, eta, top)?;
            let mut counts = Vec::new();
            let mut h1_ratio = Vec::new();
            let mut x = 1u64;
            for _ in 1..=levels {
                x *= ladder.get() as u64;
                let k = c.count_below(x);
                counts.push(k as u64);
                h1_ratio.push(h1_content(&c.elements()[..k]) as f64 / x as f64);
            }
            let ys: Vec<f64> = counts.iter().map(|&k| ln_ratio(k, ln_l)).collect();
            Ok(Combo { lambda, eta, sizes: (a.len(), b.len()), counts, h1_ratio, slope: top_slope(&ys) })
        })
        .collect::<Result<_, _>>()?;

    let mut rep = Report::new(spec);
    let label = format!("{an}+{bn}");
    for c in &results {
        for (i, &k) in c.counts.iter().enumerate() {
            let n = i as u32 + 1;
            rep.row(&label, c.lambda, c.eta, n, k, ln_ratio(k, ln_l) / n as f64);
        }
    }
    let center = results.iter().position(|c| c.lambda == one && c.eta == one).unwrap_or(0);
    let cs = &results[center];

    let dim_a = sa.entropy(24).spectral;
    let dim_b = sb.entropy(24).spectral;
    let target = match spec.parse::<f64>("expect")? {
        Some(x) => Some(x),
        None if independent => Some((dim_a + dim_b).min(1.0)),
        None => None,
    };
    if let Some(x) = target {
        rep.check(
            format!("slope at λ={}, η={}", cs.lambda, cs.eta),
            false,
            (cs.slope - x).abs() <= tol,
            format!("slope {:.6}, target {x:.6} ± {tol}", cs.slope),
        );
    }

    // Same base and no carries: the digit sumset counts exactly.
    if let (Some((r1, d1)), Some((r2, d2))) = (digit_set(an), digit_set(bn)) {
        let no_carry = d1.iter().max().unwrap_or(&0) + d2.iter().max().unwrap_or(&0) < r1;
        if r1 == r2 && r1 == ladder.get() && no_carry && cs.lambda == one && cs.eta == one {
            let sums: BTreeSet<u32> = d1.iter().flat_map(|x| d2.iter().map(move |y| x + y)).collect();
            let k = sums.len() as u64;
            let bad = cs.counts.iter().enumerate().find(|&(i, &c)| Some(c) != k.checked_pow(i as u32 + 1));
            rep.check(
                format!("|(A+B) ∩ [0,{r1}^N)| = {k}^N for N ≤ {levels}"),
                true,
                bad.is_none(),
                match bad {
                    None => "all levels match".to_string(),
                    Some((i, c)) => format!("level {} has {c}", i + 1),
                },
            );
        }
    }

    if results.len() > 1 {
        let mut min_rows = Vec::new();
        for i in 0..levels as usize {
            let k = results.iter().map(|c| c.counts[i]).min().unwrap_or(0);
            min_rows.push(k);
            rep.row(&label, "min", "min", i as u32 + 1, k, ln_ratio(k, ln_l) / (i + 1) as f64);
        }
        let (argmin, grid_min) = results
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.slope))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        rep.check(
            "grid minimum of the slope stays at the diagonal value",
            false,
            (grid_min - cs.slope).abs() <= tol,
            format!(
                "min {grid_min:.6} at λ={}, η={}; diagonal {:.6} ± {tol}",
                results[argmin].lambda, results[argmin].eta, cs.slope
            ),
        );
        rep.detail("grid_min_slope", json!(grid_min));
    }

    rep.detail("dim_a", json!(dim_a));
    rep.detail("dim_b", json!(dim_b));
    rep.detail("independent", json!(independent));
    rep.detail("target", json!(target));
    rep.detail(
        "combos",
        Value::Array(
            results
                .iter()
                .map(|c| {
                    json!({
                        "lambda": c.lambda.to_string(),
                        "eta": c.eta.to_string(),
                        "sizes": [c.sizes.0, c.sizes.1],
                        "slope": c.slope,
                        "h1_ratio": c.h1_ratio,
                    })
                })
                .collect(),
        ),
    );
    Ok(rep)
}

fn counterexample(spec: &ExperimentSpec) -> Result<Report, Error> {
    spec.check_keys(&["r", "s", "levels", "tolerance"])?;
    let r = radix(spec, "r", 2)?;
    let s = radix(spec, "s", 3)?;
    if r.get() >= s.get() {
        return Err(usage(spec, "needs r < s"));
    }
    let levels: u32 = spec.parse_or("levels", 30)?;
    let tol = spec.parse_or("tolerance", COUNTEREXAMPLE_TOLERANCE)?;
    let bound = r
        .checked_pow_u64(levels)
        .filter(|&b| b <= MAX_WINDOW && levels >= 2)
        .ok_or_else(|| usage(spec, "r^levels must lie in [r², 2^34]"))?;
    let (a, b) = intset::counterexample_pair(r, s, bound);
    let mut rep = Report::new(spec);

    let levels_b = intset::levels_below(s, bound);
    let bracket = |set: &IntSet, base: Radix, top: u32, rep: &mut Report, name: &str| {
        let ln = (base.get() as f64).ln();
        let mut bad = None;
        for n in 1..=top {
            let k = set.count_below(base.checked_pow_u64(n).expect("inside the bound")) as u64;
            rep.row(name, base, "", n, k, ln_ratio(k, ln) / n as f64);
            if bad.is_none() && !intset::mass_bracket_holds(base, n, k) {
                bad = Some((n, k));
            }
        }
        bad
    };
    let bad_a = bracket(&a, r, levels, &mut rep, "A");
    let bad_b = bracket(&b, s, levels_b, &mut rep, "B");
    let show = |x: Option<(u32, u64)>| match x {
        None => "holds at every level".to_string(),
        Some((n, k)) => format!("fails at N={n} with count {k}"),
    };
    rep.check(format!("(I) r^(N/2) ≤ |A ∩ [0,{r}^N)| ≤ (N+1)²(r^((N+1)/2)+1), N ≤ {levels}"), true, bad_a.is_none(), show(bad_a));
    rep.check(format!("(I) same bracket for B in base {s}, N ≤ {levels_b}"), true, bad_b.is_none(), show(bad_b));
    rep.check(format!("(II) {r}A ⊆ A"), true, intset::closed_under_multiplication(&a, r), "");
    rep.check(format!("(II) {s}B ⊆ B"), true, intset::closed_under_multiplication(&b, s), "");
    rep.check(format!("(III) Φ_{r}(A) = A"), true, intset::phi_fixed(&a, r), "");
    rep.check(format!("(III) Φ_{s}(B) = B"), true, intset::phi_fixed(&b, s), "");

    let counts = intset::counterexample_sumset_counts(r, s, levels)?;
    let ln_r = (r.get() as f64).ln();
    let mut bad = None;
    for n in 1..=levels {
        let k = counts[n as usize];
        rep.row("A+B", r, "", n, k, ln_ratio(k, ln_r) / n as f64);
        if bad.is_none() && !intset::sumset_bound_holds(r, n, k) {
            bad = Some((n, k));
        }
    }
    rep.check(format!("(IV) |(A+B) ∩ [0,{r}^N)| ≤ 4N⁴·{r}^(4N/5), N ≤ {levels}"), true, bad.is_none(), show(bad));

    let da = intset::mass_dimension(&a, r);
    let db = intset::mass_dimension(&b, s);
    for (name, d) in [("A", &da), ("B", &db)] {
        rep.check(
            format!("dimension estimate of {name}"),
            false,
            (d.estimate - 0.5).abs() <= tol,
            format!("estimate {:.6}, expected 0.5 ± {tol}", d.estimate),
        );
    }
    rep.detail("sizes", json!([a.len(), b.len()]));
    rep.detail("dim_a", json!(da.estimate));
    rep.detail("dim_b", json!(db.estimate));
    rep.detail("sumset_slope", json!(top_slope(&counts[1..].iter().map(|&k| ln_ratio(k, ln_r)).collect::<Vec<_>>())));
    Ok(rep)
}

fn furstenberg(spec: &ExperimentSpec) -> Result<Report, Error> {
    spec.check_keys(&["r", "s", "seeds", "seed_fixture", "bound", "expect_run", "expect_closure", "prefix_len"])?;
    let r = radix(spec, "r", 2)?;
    let s = radix(spec, "s", 3)?;
    if !multiplicatively_independent(r, s) {
        return Err(usage(spec, format!("bases {r} and {s} are multiplicatively dependent")));
    }
    let bound = spec.integer("bound")?.unwrap_or(1 << 20);
    let mut seed: Vec<u64> = spec.list("seeds")?.unwrap_or_default();
    if let Some(&x) = seed.iter().find(|&&x| x >= bound) {
        return Err(usage(spec, format!("seed {x} is not below the bound {bound}")));
    }
    if let Some(name) = spec.get("seed_fixture") {
        seed.extend_from_slice(fixture::resolve(name)?.embed(bound).elements());
    }
    let seed = IntSet::new(seed, bound)?;
    let maps = DigitMap::all_four(r, s);

    let mut rep = Report::new(spec);
    // Growth of the initial run along the ladder r^k ≤ bound.
    let mut k = 1u32;
    while let Some(b) = r.checked_pow_u64(k).filter(|&b| b < bound) {
        let c = intset::closure(&seed.truncate(b), &maps);
        rep.row("closure", r, s, k, c.len(), c.initial_run().map_or(-1.0, |x| x as f64));
        k += 1;
    }
    let c = intset::closure(&seed, &maps);
    let run = c.initial_run();
    rep.row("closure", r, s, k, c.len(), run.map_or(-1.0, |x| x as f64));
    let shown: Vec<u64> = c.elements().iter().take(32).copied().collect();

    if let Some(want) = spec.parse::<u64>("expect_run")? {
        rep.check(
            format!("closure ⊇ [0, {want}]"),
            true,
            run.is_some_and(|x| x >= want),
            format!("closure has {} elements, initial run {run:?}, starts {shown:?}", c.len()),
        );
    }
    if let Some(want) = spec.list::<u64>("expect_closure")? {
        let want: BTreeSet<u64> = want.into_iter().collect();
        let got: BTreeSet<u64> = c.elements().iter().copied().collect();
        rep.check(format!("closure = {want:?}"), true, got == want, format!("starts {shown:?}"));
    }
    if let Some(len) = spec.parse::<u32>("prefix_len")? {
        let mut missing = Vec::new();
        let mut checked = 0;
        for l in 1..=len {
            for w in words(r.get(), l) {
                let word = DigitWord::new(w, r)?;
                checked += 1;
                if find_beginning_with(&c, s, &word).is_none() {
                    missing.push(word.digits().iter().map(|d| char::from_digit(*d, 36).unwrap()).collect::<String>());
                }
            }
        }
        rep.check(
            format!("every base-{r} word of length ≤ {len} begins some element"),
            true,
            missing.is_empty(),
            format!("{checked} words, missing {missing:?}"),
        );
    }
    rep.detail("closure_size", json!(c.len()));
    rep.detail("initial_run", json!(run));
    rep.detail("closure_start", json!(shown));
    Ok(rep)
}

/// Big-endian words of length `l` with a nonzero leading digit.
fn words(r: u32, l: u32) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = (1..r).map(|d| vec![d]).collect();
    for _ in 1..l {
        out = out.into_iter().flat_map(|w| (0..r).map(move |d| [w.clone(), vec![d]].concat())).collect();
    }
    out
}

fn iterated_sumset(spec: &ExperimentSpec) -> Result<Report, Error> {
    spec.check_keys(&["fixture", "max_n", "levels"])?;
    let name = spec.get("fixture").unwrap_or("digits:10:012");
    let sigma = fixture::resolve(name)?;
    let r = sigma.radix();
    let max_n: u32 = spec.parse_or("max_n", 6)?;
    let levels: u32 = spec.parse_or("levels", 6)?;
    let top = r
        .checked_pow_u64(levels)
        .filter(|&t| t <= MAX_WINDOW && levels >= 2)
        .ok_or_else(|| usage(spec, "r^levels must lie in [r², 2^34]"))?;
    let a = sigma.embed(top);
    let ln_r = (r.get() as f64).ln();
    let digits = digit_set(name);

    let mut rep = Report::new(spec);
    let mut cur = a.clone();
    let mut prev: Option<Vec<u64>> = None;
    let mut estimates = Vec::new();
    let mut monotone = true;
    let mut digit_sums: BTreeSet<u32> = [0].into_iter().collect();
    for n in 1..=max_n {
        if n > 1 && cur.len() as u64 != top {
            cur = intset::sumset(&cur, &a, top)?;
        }
        let counts: Vec<u64> = (1..=levels).map(|k| cur.count_below(r.checked_pow_u64(k).unwrap()) as u64).collect();
        for (i, &k) in counts.iter().enumerate() {
            rep.row(name, format!("n={n}"), r, i as u32 + 1, k, ln_ratio(k, ln_r) / (i + 1) as f64);
        }
        let est = intset::mass_dimension(&cur, r).estimate;
        estimates.push(est);
        if let Some(p) = &prev {
            monotone &= p.iter().zip(&counts).all(|(x, y)| x <= y);
        }

        if let Some((_, d)) = &digits {
            digit_sums = digit_sums.iter().flat_map(|x| d.iter().map(move |y| x + y)).collect();
            let no_carry = digit_sums.iter().all(|&x| x < r.get());
            let covers = (0..r.get()).all(|x| digit_sums.contains(&x));
            let base = if no_carry {
                Some(digit_sums.len() as u64)
            } else if covers {
                Some(r.get() as u64)
            } else {
                None
            };
            if let Some(k) = base {
                let bad = counts.iter().enumerate().find(|&(i, &c)| Some(c) != k.checked_pow(i as u32 + 1));
                rep.check(
                    format!("n={n}: |nA ∩ [0,{r}^N)| = {k}^N for N ≤ {levels}"),
                    true,
                    bad.is_none(),
                    match bad {
                        None => format!("estimate {est:.6}"),
                        Some((i, c)) => format!("level {} has {c}", i + 1),
                    },
                );
            }
        }
        prev = Some(counts);
    }
    rep.check("counts never decrease in n", true, monotone, format!("estimates {estimates:?}"));
    rep.detail("estimates", json!(estimates));
    Ok(rep)
}

/// `|{x < bound : every base-r digit of x lies in d}|`.
pub fn count_restricted(r: u32, d: &[u32], bound: u64) -> u64 {
    if bound == 0 {
        return 0;
    }
    let r64 = r as u64;
    let mut digs = Vec::new();
    let mut x = bound - 1;
    loop {
        digs.push((x % r64) as u32);
        x /= r64;
        if x == 0 {
            break;
        }
    }
    digs.reverse();
    let l = digs.len();
    let k = d.len() as u64;
    let nonzero = d.iter().filter(|&&v| v != 0).count() as u64;
    let mut total = 0u64;
    for len in 1..l {
        total += if len == 1 { k } else { nonzero * k.pow(len as u32 - 1) };
    }
    for (i, &xd) in digs.iter().enumerate() {
        let rest = k.pow((l - 1 - i) as u32);
        let below = d.iter().filter(|&&v| v < xd && !(i == 0 && l > 1 && v == 0)).count() as u64;
        total += below * rest;
        if !d.contains(&xd) {
            return total;
        }
    }
    total + 1
}

fn has_digits(mut x: u64, r: u64, d: &[u32]) -> bool {
    loop {
        if !d.contains(&((x % r) as u32)) {
            return false;
        }
        x /= r;
        if x == 0 {
            return true;
        }
    }
}

fn digit_intersection(spec: &ExperimentSpec) -> Result<Report, Error> {
    spec.check_keys(&["bases", "digits", "bound", "expect", "expect_count"])?;
    let bases: Vec<u32> = spec.list("bases")?.unwrap_or_else(|| vec![2, 3, 4, 5]);
    let mut d: Vec<u32> = spec.list("digits")?.unwrap_or_else(|| vec![0, 1]);
    d.sort_unstable();
    d.dedup();
    let bound = spec.integer("bound")?.unwrap_or(10_000_000);
    let Some(&widest) = bases.iter().max() else { return Err(usage(spec, "no bases")) };
    let rs = bases.iter().map(|&b| Radix::new(b)).collect::<Result<Vec<_>, _>>()?;
    if let Some(&bad) = d.iter().find(|&&x| x >= *bases.iter().min().unwrap()) {
        return Err(usage(spec, format!("digit {bad} does not fit every base")));
    }

    let mut rep = Report::new(spec);
    for r in &rs {
        let n = count_restricted(r.get(), &d, bound);
        rep.row(&format!("base {r}"), "digits", format!("{d:?}"), intset::levels_below(*r, bound), n, n as f64 / bound as f64);
    }
    // Enumerate in the sparsest base, filter by the others.
    let base = IntSet::restricted_digits(Radix::new(widest)?, &d, bound);
    let hits: Vec<u64> = base
        .elements()
        .iter()
        .copied()
        .filter(|&x| bases.iter().all(|&b| has_digits(x, b as u64, &d)))
        .collect();
    rep.row("intersection", format!("{bases:?}"), format!("{d:?}"), 0, hits.len(), hits.len() as f64 / bound as f64);

    let shown: Vec<u64> = hits.iter().take(32).copied().collect();
    if let Some(want) = spec.list::<u64>("expect")? {
        rep.check(format!("intersection below {bound} = {want:?}"), true, hits == want, format!("{} elements, starts {shown:?}", hits.len()));
    }
    if let Some(want) = spec.integer("expect_count")? {
        rep.check(format!("intersection below {bound} has {want} elements"), true, hits.len() as u64 == want, format!("{} elements", hits.len()));
    }
    rep.detail("count", json!(hits.len()));
    rep.detail("start", json!(shown));
    Ok(rep)
}

fn pipeline(spec: &ExperimentSpec) -> Result<Report, Error> {
    spec.check_keys(&["x", "y", "m", "n", "t", "gammas", "eps", "interval", "precision", "uniformity", "dump_tree"])?;
    let xn = spec.get("x").unwrap_or("golden");
    let yn = spec.get("y").unwrap_or("digits:3:02");
    let gammas: Vec<f64> = spec.list("gammas")?.unwrap_or_else(|| pipeline::DESK_CHAIN.to_vec());
    let gammas: [f64; 5] = gammas.try_into().map_err(|_| usage(spec, "gammas needs five values"))?;
    let interval: Vec<f64> = spec.list("interval")?.unwrap_or_else(|| vec![0.0, 0.5]);
    let [lo, hi]: [f64; 2] = interval.try_into().map_err(|_| usage(spec, "interval needs two values"))?;
    let cfg = PipelineConfig {
        x: fixture::resolve(xn)?,
        y: fixture::resolve(yn)?,
        m: spec.parse_or("m", 4)?,
        n: spec.parse_or("n", 4)?,
        t: spec.parse_or("t", 0.0)?,
        gammas,
        eps: spec.parse_or("eps", pipeline::DESK_EPS)?,
        interval: (lo, hi),
        seed: spec.seed,
    };
    let prepared = pipeline::prepare(&cfg)?;
    let r = pipeline::run_at(&prepared, cfg.t);

    let mut rep = Report::new(spec);
    let label = format!("{xn}×{yn}");
    let ln_big_r = ((r.r as f64).powi(r.m as i32)).ln();
    for (n, size) in r.level_sizes.iter().enumerate() {
        let v = if n == 0 { 0.0 } else { stats::ln_big(size) / ln_big_r / n as f64 };
        rep.row(&label, format!("m={}", r.m), format!("t={}", r.t), n as u32, size, v);
    }
    let sep = &r.separation;
    rep.check(
        "leaf separation for every pair",
        true,
        sep.holds,
        format!("{} adjacent pairs, worst ratio {:.4}, violation {:?}", sep.pairs_checked, sep.worst_ratio, sep.first_violation),
    );
    rep.check(
        format!("fertile ancestry from height N₀ = {}", r.n0),
        true,
        r.fertility_holds,
        format!("{} violations, histogram {:?}", r.fertility_violations, r.fertility_histogram),
    );
    rep.check(
        "μ(B) ≤ threshold·δ^γ₁ over the atomic ball family",
        true,
        r.ball.holds,
        format!("{} balls, max ratio {:.4}, threshold {}", r.ball.balls_checked, r.ball.max_ratio, r.ball.threshold),
    );
    rep.check("μ has mass exactly 1", true, r.mass_is_one, format!("{} atoms", r.leaf_count));
    rep.check("|𝒥 ∩ [0,n)| ≥ (1−ε/3)n for N₀ ≤ n ≤ N", true, r.j_bookkeeping_holds, format!("{:?}", r.extraction_levels));
    rep.detail("report", pipeline_json(&r));

    if let Some(k) = spec.parse::<usize>("uniformity")? {
        let u = pipeline::uniformity(&cfg, k)?;
        let worst = u.iter().map(|x| x.1).fold(0.0, f64::max);
        rep.detail("uniformity", json!({
            "slopes": u.iter().map(|x| json!({"t": x.0, "max_ratio": x.1, "passed": x.2})).collect::<Vec<_>>(),
            "max_ratio": worst,
        }));
        rep.check(format!("concentration statistic finite over {k} slopes"), false, worst.is_finite(), format!("max {worst:.4}"));
    }
    if spec.parse_or("dump_tree", false)? {
        let g = pipeline::projection_tree(&prepared, cfg.t).tree;
        let mut buf = Vec::new();
        formats::write_tree(&mut buf, &g, |q| format!("{} {} {} {}", q.x, q.y, q.x_state, q.y_state))?;
        rep.artifacts.push(("tree.csv".into(), buf));
    }
    Ok(rep)
}
