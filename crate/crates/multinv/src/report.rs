//! Experiment reports and their JSON form.

use serde::Serialize;
use serde_json::{json, Value};

use multinv_core::pipeline::PipelineReport;
use multinv_core::Interval;

use crate::formats::Row;
use crate::spec::{ExperimentSpec, Kind};

/// Package version and the git revision it was built from.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"), " (", env!("MULTINV_REVISION"), ")");

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    /// Exact claims are decided in integers; the rest are tolerance bands
    /// around asymptotic values.
    pub exact: bool,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: Kind,
    pub seed: u64,
    pub version: &'static str,
    pub spec: String,
    pub assertions: Vec<Assertion>,
    pub details: Value,
    #[serde(skip)]
    pub rows: Vec<Row>,
    /// Extra files, `(suffix, contents)`.
    #[serde(skip)]
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Report {
    pub fn new(spec: &ExperimentSpec) -> Report {
        Report {
            experiment: spec.kind,
            seed: spec.seed,
            version: VERSION,
            spec: spec.to_text(),
            assertions: Vec::new(),
            details: json!({}),
            rows: Vec::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, exact: bool, passed: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion { name: name.into(), exact, passed, detail: detail.into() });
    }

    pub fn detail(&mut self, key: &str, value: Value) {
        self.details[key] = value;
    }

    pub fn row(&mut self, fixture: &str, param1: impl ToString, param2: impl ToString, level: u32, count: impl ToString, value: f64) {
        self.rows.push(Row {
            experiment: self.experiment.name().to_string(),
            fixture: fixture.to_string(),
            param1: param1.to_string(),
            param2: param2.to_string(),
            level,
            count: count.to_string(),
            value: value.to_string(),
        });
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Assertion> {
        self.assertions.iter().filter(|a| !a.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

fn interval(i: Interval) -> Value {
    json!([i.lo(), i.hi()])
}

pub fn pipeline_json(r: &PipelineReport) -> Value {
    json!({
        "r": r.r,
        "s": r.s,
        "m": r.m,
        "n": r.n,
        "t": r.t,
        "seed": r.seed,
        "m_prime": r.m_prime,
        "rho": r.rho,
        "lipschitz": r.lipschitz,
        "c3": r.c3,
        "dim_sum": r.dim_sum,
        "level_sizes": r.level_sizes.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "q_m_size": r.q_m_size,
        "q_m_tilde_size": r.q_m_tilde_size,
        "size_exponents": [r.size_exponents.0, r.size_exponents.1],
        "size_window_holds": r.size_window_holds,
        "content": interval(r.content),
        "max_children": r.max_children,
        "gamma5_eff": r.gamma5_eff,
        "thinning_case_counts": r.thinning_case_counts,
        "thinning_inequality_holds": r.thinning_inequality_holds,
        "n0_thinning": r.n0_thinning,
        "n0_equidistribution": r.n0_equidistribution,
        "n0": r.n0,
        "below_theoretical_regime": r.below_theoretical_regime,
        "bad_slope_measure": r.bad_slope_measure,
        "bad_slope_budget": r.bad_slope_budget,
        "good_levels": r.good_levels,
        "extraction_levels": r.extraction_levels,
        "j_bookkeeping_holds": r.j_bookkeeping_holds,
        "orbit_discrepancy": r.orbit_discrepancy,
        "marstrand_nodes": r.marstrand_nodes,
        "single_child_nodes": r.single_child_nodes,
        "leaf_count": r.leaf_count,
        "fertility_histogram": r.fertility_histogram,
        "fertility_holds": r.fertility_holds,
        "fertility_violations": r.fertility_violations,
        "mass_is_one": r.mass_is_one,
        "separation": {
            "holds": r.separation.holds,
            "pairs_checked": r.separation.pairs_checked,
            "worst_ratio": r.separation.worst_ratio,
            "first_violation": r.separation.first_violation,
        },
        "ball": {
            "holds": r.ball.holds,
            "threshold": r.ball.threshold,
            "gamma": r.ball.gamma,
            "max_ratio": r.ball.max_ratio,
            "balls_checked": r.ball.balls_checked,
            "first_violation": r.ball.first_violation,
        },
        "passed": r.passed,
    })
}
