//! Report documents written by the CLI: a versioned JSON envelope, or CSV
//! with one row per item.

use serde::{Deserialize, Serialize};

use crate::bounds::BoundSet;
use crate::config::{Command, RunConfig};
use crate::error::{Error, Result};
use crate::games::{GameOutcome, GameSpec, Summary};
use crate::stats::{FailureStats, StatRecord};
use crate::toy::SpreadnessParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemError {
    pub item: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: Command,
    /// The effective configuration, flags applied.
    pub config: RunConfig,
    pub results: Results,
    pub errors: Vec<ItemError>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Results {
    Demo(DemoResult),
    Games(GamesResult),
    Stats(StatsResult),
    Bounds(BoundsResult),
    Spread(SpreadResult),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoResult {
    pub scheme: String,
    pub cycles: u64,
    /// Decapsulation returned a key different from the encapsulated one.
    pub mismatches: u64,
    /// Decapsulation returned ⊥.
    pub rejections: u64,
    pub failure_rate: f64,
    pub std_error: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameRun {
    pub spec: GameSpec,
    pub summary: Option<Summary>,
    /// Kept out of the report; streamed to the outcomes file instead.
    #[serde(skip)]
    pub outcomes: Vec<GameOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GamesResult {
    pub scheme: String,
    pub runs: Vec<GameRun>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactComparison {
    pub delta_ik: f64,
    pub sigma: f64,
    /// Exact tail at each grid point.
    pub tail: Vec<f64>,
    /// Largest `|estimate - exact| / SE` over δ, σ and the tail grid.
    pub max_z: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NkBoundPoint {
    pub q: u64,
    pub chebyshev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsResult {
    pub scheme: String,
    pub stats: FailureStats,
    pub records: Vec<StatRecord>,
    /// Present when the key space is small enough to enumerate.
    pub exact: Option<ExactComparison>,
    /// FFP-NK success bounds from the estimated δ and σ.
    pub nk_bounds: Vec<NkBoundPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crosscheck {
    pub route: String,
    pub max_deviation: f64,
    pub max_relative_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsResult {
    pub bounds: BoundSet,
    pub crosscheck: Vec<Crosscheck>,
    /// Spreadness budget exponents of the named parameter sets at `q_D = 2^64`.
    pub spread_budget: Vec<SpreadRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadRow {
    pub name: String,
    pub params: SpreadnessParams,
    pub gamma: f64,
    pub gamma_floor: u64,
    /// `floor(log2 C(n, w))` for code-based sets.
    pub log2_binomial_floor: Option<u64>,
    pub budget_exponent: i64,
    /// `q_G * 2^e` bound on the spreadness term.
    pub budget: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToySpreadRow {
    pub scheme: String,
    pub gamma: f64,
    pub max_multiplicity: u64,
    pub randomness_size: u64,
    pub argmax_message: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadResult {
    pub rows: Vec<SpreadRow>,
    pub toy: Option<ToySpreadRow>,
}

impl Report {
    /// Every game outcome as JSON lines, in configuration then seed order.
    pub fn outcome_lines(&self) -> Result<String> {
        let mut out = String::new();
        if let Results::Games(g) = &self.results {
            for o in g.runs.iter().flat_map(|r| &r.outcomes) {
                out.push_str(&serde_json::to_string(o).map_err(|e| Error::Invariant(e.to_string()))?);
                out.push('\n');
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Invariant(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut put = |r: Vec<String>| w.write_record(&r).map_err(|e| Error::Invariant(e.to_string()));
        match &self.results {
            Results::Demo(d) => {
                put(cols(&["scheme", "cycles", "mismatches", "rejections", "failure_rate", "std_error", "wilson_low", "wilson_high"]))?;
                put(vec![
                    d.scheme.clone(),
                    d.cycles.to_string(),
                    d.mismatches.to_string(),
                    d.rejections.to_string(),
                    num(d.failure_rate),
                    num(d.std_error),
                    num(d.wilson_low),
                    num(d.wilson_high),
                ])?;
            }
            Results::Games(g) => {
                put(cols(&[
                    "game", "adversary", "rejection", "trials", "wins", "win_rate", "std_error", "wilson_low", "wilson_high",
                    "advantage", "guess_runs", "diff_runs", "fail_runs", "error",
                ]))?;
                for run in &g.runs {
                    let mut row = vec![
                        run.spec.game.to_string(),
                        run.spec.adversary.clone(),
                        format!("{:?}", run.spec.rejection).to_lowercase(),
                    ];
                    match &run.summary {
                        Some(s) => row.extend([
                            s.trials.to_string(),
                            s.wins.to_string(),
                            num(s.win_rate),
                            num(s.std_error),
                            num(s.wilson_low),
                            num(s.wilson_high),
                            num(s.advantage),
                            s.guess_runs.to_string(),
                            s.diff_runs.to_string(),
                            s.fail_runs.to_string(),
                            String::new(),
                        ]),
                        None => {
                            row.extend(std::iter::repeat(String::new()).take(10));
                            let item = format!("{}/{}", run.spec.game, run.spec.adversary);
                            let msg = self.errors.iter().find(|e| e.item == item).map(|e| e.message.clone());
                            row.push(msg.unwrap_or_default());
                        }
                    }
                    put(row)?;
                }
            }
            Results::Stats(s) => {
                put(cols(&["statistic", "value", "stderr", "trials", "seed", "formula_id", "inputs"]))?;
                for r in &s.records {
                    put(vec![
                        r.statistic.clone(),
                        num(r.value),
                        num(r.stderr),
                        r.trials.to_string(),
                        r.seed.to_string(),
                        r.formula_id.clone(),
                        r.inputs.to_string(),
                    ])?;
                }
            }
            Results::Bounds(b) => {
                put(cols(&["route", "term", "formula_id", "value", "log2", "exact", "symbolic", "inputs"]))?;
                for r in &b.bounds.reports {
                    for t in &r.terms {
                        let symbolic: Vec<String> = t.value.symbolic.iter().map(|s| s.to_string()).collect();
                        let inputs: Vec<String> = t.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
                        put(vec![
                            r.route.clone(),
                            t.name.clone(),
                            t.formula_id.clone(),
                            num(t.value.known.value),
                            num(t.value.known.log2),
                            t.value.known.exact.clone(),
                            symbolic.join(" + "),
                            inputs.join(";"),
                        ])?;
                    }
                    let (v, l, e) = match &r.total {
                        Some(t) => (num(t.value), num(t.log2), t.exact.clone()),
                        None => (String::new(), String::new(), String::new()),
                    };
                    put(vec![r.route.clone(), "total".into(), String::new(), v, l, e, r.total_formula(), r.diagnostics.join(";")])?;
                }
            }
            Results::Spread(s) => {
                put(cols(&["name", "gamma", "gamma_floor", "log2_binomial_floor", "budget_exponent", "budget"]))?;
                for r in &s.rows {
                    put(vec![
                        r.name.clone(),
                        num(r.gamma),
                        r.gamma_floor.to_string(),
                        r.log2_binomial_floor.map(|v| v.to_string()).unwrap_or_default(),
                        r.budget_exponent.to_string(),
                        r.budget.clone(),
                    ])?;
                }
                if let Some(t) = &s.toy {
                    put(vec![t.scheme.clone(), num(t.gamma), String::new(), String::new(), String::new(), String::new()])?;
                }
            }
        }
        let bytes = w.into_inner().map_err(|e| Error::Invariant(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Invariant(e.to_string()))
    }
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Shortest round-tripping decimal.
fn num(v: f64) -> String {
    format!("{v:?}")
}
