//! Text formats.
//!
//! * IntSet: a `# bound=B` header, then one decimal element per line, sorted.
//! * Point sets: CSV of exact fractions `p/q`, one column per coordinate.
//! * Trees: CSV rows `id, level, parent_id, payload`; ids number nodes level by
//!   level, the root's parent is `-`.
//! * Projection scans: `theta_or_t,entropy_of_projection,flagged`.
//! * Experiment rows: `experiment,fixture,param1,param2,level,count,value`.

use std::io::{BufRead, Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use multinv_core::fractal::{PointSet1D, PointSet2D};
use multinv_core::projection::ExceptionalScan;
use multinv_core::tree::{NodeId, Tree};
use multinv_core::IntSet;

use crate::Error;

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Format { line, message: message.into() }
}

pub fn write_intset(w: &mut impl Write, a: &IntSet) -> Result<(), Error> {
    writeln!(w, "# bound={}", a.bound())?;
    for x in a.elements() {
        writeln!(w, "{x}")?;
    }
    Ok(())
}

pub fn read_intset(r: impl BufRead) -> Result<IntSet, Error> {
    let mut lines = r.lines();
    let head = lines.next().ok_or_else(|| bad(1, "empty input"))??;
    let bound: u64 = head
        .trim()
        .strip_prefix("# bound=")
        .and_then(|b| b.trim().parse().ok())
        .ok_or_else(|| bad(1, "expected \"# bound=B\""))?;
    let mut v = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        v.push(t.parse().map_err(|_| bad(i + 2, format!("not an integer: {t:?}")))?);
    }
    IntSet::new(v, bound).map_err(|e| bad(0, e.to_string()))
}

fn parse_fraction(s: &str, line: usize) -> Result<BigRational, Error> {
    let s = s.trim();
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.trim().parse().map_err(|_| bad(line, format!("bad numerator in {s:?}")))?;
    let q: BigInt = q.trim().parse().map_err(|_| bad(line, format!("bad denominator in {s:?}")))?;
    if q == BigInt::from(0) {
        return Err(bad(line, "zero denominator"));
    }
    Ok(BigRational::new(p, q))
}

fn csv_reader(r: impl Read) -> csv::Reader<impl Read> {
    csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).flexible(true).from_reader(r)
}

fn csv_writer(w: impl Write) -> csv::Writer<impl Write> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

pub fn write_points_1d(w: impl Write, p: &PointSet1D) -> Result<(), Error> {
    let mut out = csv_writer(w);
    for x in p.points() {
        out.write_record([x.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_points_2d(w: impl Write, p: &PointSet2D) -> Result<(), Error> {
    let mut out = csv_writer(w);
    for (x, y) in p.points() {
        out.write_record([x.to_string(), y.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

fn read_columns(r: impl Read, cols: usize) -> Result<Vec<Vec<BigRational>>, Error> {
    let mut out = Vec::new();
    for (i, rec) in csv_reader(r).records().enumerate() {
        let rec = rec?;
        if rec.len() != cols {
            return Err(bad(i + 1, format!("expected {cols} column(s), found {}", rec.len())));
        }
        out.push(rec.iter().map(|f| parse_fraction(f, i + 1)).collect::<Result<_, _>>()?);
    }
    Ok(out)
}

pub fn read_points_1d(r: impl Read) -> Result<PointSet1D, Error> {
    let rows = read_columns(r, 1)?;
    Ok(PointSet1D::new(rows.into_iter().map(|mut v| v.remove(0)).collect())?)
}

pub fn read_points_2d(r: impl Read) -> Result<PointSet2D, Error> {
    let rows = read_columns(r, 2)?;
    Ok(PointSet2D::new(
        rows.into_iter()
            .map(|v| {
                let [x, y]: [BigRational; 2] = v.try_into().expect("two columns");
                (x, y)
            })
            .collect(),
    )?)
}

pub fn write_tree<P: Clone>(w: impl Write, t: &Tree<P>, mut payload: impl FnMut(&P) -> String) -> Result<(), Error> {
    let mut out = csv_writer(w);
    let mut offset = vec![0u64];
    for n in 0..=t.height() {
        offset.push(offset[n as usize] + t.level_len(n) as u64);
    }
    for q in t.nodes() {
        let id = offset[q.level as usize] + q.index as u64;
        let parent = match t.parent(q) {
            Some(p) => (offset[p.level as usize] + p.index as u64).to_string(),
            None => "-".to_string(),
        };
        out.write_record([id.to_string(), q.level.to_string(), parent, payload(t.payload(q))])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a dump written by [`write_tree`]; rows must come level by level.
pub fn read_tree(r: impl Read) -> Result<Tree<String>, Error> {
    let mut parents: Vec<Vec<u32>> = Vec::new();
    let mut payloads: Vec<Vec<String>> = Vec::new();
    // global id -> (level, index)
    let mut place: Vec<(u32, u32)> = Vec::new();
    for (i, rec) in csv_reader(r).records().enumerate() {
        let line = i + 1;
        let rec = rec?;
        if rec.len() != 4 {
            return Err(bad(line, "expected id, level, parent_id, payload"));
        }
        let id: usize = rec[0].parse().map_err(|_| bad(line, "bad id"))?;
        let level: u32 = rec[1].parse().map_err(|_| bad(line, "bad level"))?;
        if id != place.len() {
            return Err(bad(line, "ids must be consecutive from 0"));
        }
        let parent = if &rec[2] == "-" {
            if level != 0 {
                return Err(bad(line, "only the root may lack a parent"));
            }
            0
        } else {
            let p: usize = rec[2].parse().map_err(|_| bad(line, "bad parent id"))?;
            match place.get(p) {
                Some(&(pl, pi)) if pl + 1 == level => pi,
                _ => return Err(bad(line, "parent must be an earlier node one level up")),
            }
        };
        let l = level as usize;
        if l > parents.len() || (l < parents.len() && l + 1 != parents.len()) {
            return Err(bad(line, "rows must be grouped by level"));
        }
        if l == parents.len() {
            parents.push(Vec::new());
            payloads.push(Vec::new());
        }
        place.push((level, parents[l].len() as u32));
        parents[l].push(parent);
        payloads[l].push(rec[3].to_string());
    }
    Ok(Tree::from_parents(parents, payloads)?)
}

/// Node id in the numbering [`write_tree`] uses.
pub fn global_id<P: Clone>(t: &Tree<P>, q: NodeId) -> u64 {
    (0..q.level).map(|n| t.level_len(n) as u64).sum::<u64>() + q.index as u64
}

pub fn write_scan(w: impl Write, scan: &ExceptionalScan) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["theta_or_t", "entropy_of_projection", "flagged"])?;
    for ((t, e), f) in scan.thetas.iter().zip(&scan.entropies).zip(&scan.flagged) {
        out.write_record([t.to_string(), e.to_string(), f.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// One line of an experiment CSV. Counts are exact; `value` is derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub fixture: String,
    pub param1: String,
    pub param2: String,
    pub level: u32,
    pub count: String,
    pub value: String,
}

pub fn write_rows(w: impl Write, rows: &[Row]) -> Result<(), Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows(r: impl Read) -> Result<Vec<Row>, Error> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    Ok(rd.deserialize().collect::<Result<Vec<Row>, _>>()?)
}
