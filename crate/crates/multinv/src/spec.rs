//! Experiment specs: `key = value` lines, `#` comments, entries separated by
//! blank lines. Keys an experiment does not know are rejected when it runs.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Dims,
    SumsetDim,
    Counterexample,
    Furstenberg,
    IteratedSumset,
    DigitIntersection,
    Pipeline,
}

impl Kind {
    pub const ALL: [Kind; 7] = [
        Kind::Dims,
        Kind::SumsetDim,
        Kind::Counterexample,
        Kind::Furstenberg,
        Kind::IteratedSumset,
        Kind::DigitIntersection,
        Kind::Pipeline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Dims => "dims",
            Kind::SumsetDim => "sumset-dim",
            Kind::Counterexample => "counterexample",
            Kind::Furstenberg => "furstenberg",
            Kind::IteratedSumset => "iterated-sumset",
            Kind::DigitIntersection => "digit-intersection",
            Kind::Pipeline => "pipeline",
        }
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kind, Error> {
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Spec {
            line: 0,
            message: format!("unknown experiment {s:?}"),
        })
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One experiment entry. Values stay as text until the experiment reads them,
/// so the spec can be echoed back verbatim into reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub kind: Kind,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// The remaining keys.
    pub values: BTreeMap<String, String>,
}

impl ExperimentSpec {
    pub fn new(kind: Kind) -> ExperimentSpec {
        ExperimentSpec { kind, seed: 0, output: None, values: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> ExperimentSpec {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn bad(&self, key: &str, why: impl fmt::Display) -> Error {
        Error::Spec { line: 0, message: format!("{}: key {key:?}: {why}", self.kind) }
    }

    pub fn require(&self, key: &str) -> Result<&str, Error> {
        self.get(key).ok_or_else(|| self.bad(key, "missing"))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, Error>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.trim().parse().map(Some).map_err(|e| self.bad(key, e)),
        }
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, Error>
    where
        T::Err: fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, Error>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|e| self.bad(key, e)))
                .collect::<Result<Vec<T>, Error>>()
                .map(Some),
        }
    }

    pub fn ratios(&self, key: &str) -> Result<Option<Vec<Ratio<u64>>>, Error> {
        self.list(key)
    }

    /// A non-negative integer, written either plainly or as `a^b`.
    pub fn integer(&self, key: &str) -> Result<Option<u64>, Error> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => parse_power(v).map(Some).ok_or_else(|| self.bad(key, "expected an integer or a^b")),
        }
    }

    /// Rejects keys outside `known`.
    pub fn check_keys(&self, known: &[&str]) -> Result<(), Error> {
        match self.values.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(self.bad(k, "not used by this experiment")),
            None => Ok(()),
        }
    }

    /// The entry in spec-file syntax.
    pub fn to_text(&self) -> String {
        let mut out = format!("experiment = {}\nseed = {}\n", self.kind, self.seed);
        if let Some(p) = &self.output {
            out.push_str(&format!("output = {}\n", p.display()));
        }
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }
}

pub fn parse_power(v: &str) -> Option<u64> {
    match v.trim().split_once('^') {
        None => v.trim().parse().ok(),
        Some((a, b)) => a.trim().parse::<u64>().ok()?.checked_pow(b.trim().parse().ok()?),
    }
}

/// Parses a spec file. Entries without an `experiment` key take `default`.
pub fn parse_specs(text: &str, default: Option<Kind>) -> Result<Vec<ExperimentSpec>, Error> {
    let mut out = Vec::new();
    let mut cur: Option<(usize, Vec<(usize, String, String)>)> = None;
    let mut blocks = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if let Some(b) = cur.take() {
                blocks.push(b);
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Spec { line: i + 1, message: "expected key = value".into() });
        };
        cur.get_or_insert_with(|| (i + 1, Vec::new())).1.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    if let Some(b) = cur.take() {
        blocks.push(b);
    }
    for (start, pairs) in blocks {
        let kind = match pairs.iter().find(|p| p.1 == "experiment") {
            Some((line, _, v)) => v.parse().map_err(|_| Error::Spec { line: *line, message: format!("unknown experiment {v:?}") })?,
            None => default.ok_or(Error::Spec { line: start, message: "entry has no experiment key".into() })?,
        };
        let mut spec = ExperimentSpec::new(kind);
        for (line, k, v) in pairs {
            match k.as_str() {
                "experiment" => {}
                "seed" => {
                    spec.seed = v.parse().map_err(|_| Error::Spec { line, message: "seed must be an integer".into() })?;
                }
                "output" => spec.output = Some(PathBuf::from(v)),
                _ => {
                    if spec.values.insert(k.clone(), v).is_some() {
                        return Err(Error::Spec { line, message: format!("duplicate key {k:?}") });
                    }
                }
            }
        }
        out.push(spec);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "# two entries\nexperiment = dims\nfixture = golden, even\nlevels = 40\n\nexperiment = furstenberg\nseeds = 5; 0\nseed = 9\n";
        let specs = parse_specs(text, None).unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[0].kind, Kind::Dims);
        assert_eq!(specs[0].list::<String>("fixture").unwrap().unwrap(), vec!["golden", "even"]);
        assert_eq!(specs[0].parse::<u32>("levels").unwrap(), Some(40));
        assert_eq!(specs[1].seed, 9);
        let again = parse_specs(&specs[1].to_text(), None).unwrap();
        assert_eq!(again[0], specs[1]);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_specs("levels 40", Some(Kind::Dims)), Err(Error::Spec { line: 1, .. })));
        assert!(parse_specs("levels = 4", None).is_err());
        assert!(parse_specs("experiment = nope", None).is_err());
        assert!(parse_specs("a = 1\na = 2", Some(Kind::Dims)).is_err());
        let s = parse_specs("levels = x", Some(Kind::Dims)).unwrap();
        assert!(s[0].parse::<u32>("levels").is_err());
        assert!(s[0].check_keys(&["fixture"]).is_err());
        let r = ExperimentSpec::new(Kind::SumsetDim).with("lambda", "1/2, 1, 3/2");
        assert_eq!(r.ratios("lambda").unwrap().unwrap(), vec![Ratio::new(1, 2), Ratio::from(1), Ratio::new(3, 2)]);
        assert_eq!(parse_power("2^20"), Some(1 << 20));
        assert_eq!(parse_power(" 82000 "), Some(82000));
        assert_eq!(parse_power("2^64"), None);
        assert_eq!(parse_power("1e7"), None);
    }
}
