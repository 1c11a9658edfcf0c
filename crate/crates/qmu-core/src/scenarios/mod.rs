//! Named model configurations with expected values, relation sweeps and
//! randomized relation suites.
//!
//! Reports carry a `"schema": "qmu/1"` key. All maps are ordered, and every
//! random quantity is drawn from a stream keyed by the run seed, so a given
//! configuration always produces the same bytes.

mod library;
pub mod suite;
pub mod sweep;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::errmetrics::distance::StateSearchPolicy;
use crate::error::{QmuError, Result};
use crate::relations::RelationVerdict;
use crate::schemes::grid::GridSystem;

pub use suite::{run_all, run_suite, suite_names, FullReport, SuiteReport};
pub use sweep::{sweep, sweep_names, write_sweep_csv, write_sweep_rows, SweepRow};

pub const SCHEMA: &str = "qmu/1";

/// Global settings shared by every command.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Unit of action the report is annotated with; computations use `ħ = 1`.
    pub hbar_scale: f64,
    pub grid_n: usize,
    pub grid_l: f64,
    /// Evaluation budget for randomized suites and searches.
    pub budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            hbar_scale: 1.0,
            grid_n: 1024,
            grid_l: 12.0,
            budget: 10_000,
        }
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<GridSystem> {
        GridSystem::new(self.grid_n, self.grid_l)
    }

    pub fn search_policy(&self) -> StateSearchPolicy {
        StateSearchPolicy {
            seed: self.seed,
            ..StateSearchPolicy::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    QubitApprox,
    QubitJoint,
    Scheme,
    Grid,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub kind: ScenarioKind,
    pub summary: &'static str,
    /// Default parameter values; any of them can be overridden.
    pub parameters: BTreeMap<&'static str, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// `|observed - expected| ≤ tolerance`
    Eq,
    /// `observed > expected`
    Gt,
    /// `observed ≤ expected + tolerance`
    Le,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub name: String,
    pub comparison: Comparison,
    pub expected: f64,
    pub tolerance: f64,
    pub observed: f64,
    /// Where the expected value comes from: `analytic`, `identity` (a second
    /// route to the same quantity) or `numerical-oracle`.
    pub provenance: String,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub schema: &'static str,
    pub scenario: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub hbar_scale: f64,
    pub parameters: BTreeMap<String, f64>,
    pub quantities: BTreeMap<String, Value>,
    pub verdicts: Vec<RelationVerdict>,
    pub expectations: Vec<Expectation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ScenarioReport {
    /// Fixed-width summary for terminals.
    pub fn table(&self) -> String {
        let kind = serde_json::to_value(self.kind).unwrap_or(Value::Null);
        let mut out = format!("scenario {} ({})\n", self.scenario, kind.as_str().unwrap_or_default());
        for (k, v) in &self.parameters {
            out.push_str(&format!("  param {k:<28} {v:.12}\n"));
        }
        for e in &self.expectations {
            out.push_str(&format!(
                "  {:<4} {:<34} observed {:>16.10e}  {:?} {:>16.10e} (tol {:.0e}, {})\n",
                if e.passed { "ok" } else { "FAIL" },
                e.name,
                e.observed,
                e.comparison,
                e.expected,
                e.tolerance,
                e.provenance
            ));
        }
        for v in &self.verdicts {
            out.push_str(&format!(
                "  {:<4} {:<34} lhs {:>14.8e} rhs {:>14.8e} slack {:>+14.8e}\n",
                if v.holds { "holds" } else { "fails" },
                v.relation,
                v.lhs,
                v.rhs,
                v.slack
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

/// Accumulates one scenario run.
pub(crate) struct Ctx {
    params: BTreeMap<String, f64>,
    pub config: RunConfig,
    quantities: BTreeMap<String, Value>,
    verdicts: Vec<RelationVerdict>,
    expectations: Vec<Expectation>,
    notes: Vec<String>,
}

impl Ctx {
    pub fn p(&self, key: &str) -> f64 {
        self.params[key]
    }

    pub fn quantity(&mut self, key: &str, value: impl Serialize) {
        self.quantities.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
    }

    pub fn verdict(&mut self, v: RelationVerdict) {
        self.verdicts.push(v);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    fn push(&mut self, name: &str, comparison: Comparison, observed: f64, expected: f64, tolerance: f64, provenance: &str) {
        let passed = observed.is_finite()
            && match comparison {
                Comparison::Eq => (observed - expected).abs() <= tolerance,
                Comparison::Gt => observed > expected,
                Comparison::Le => observed <= expected + tolerance,
            };
        self.expectations.push(Expectation {
            name: name.to_string(),
            comparison,
            expected,
            tolerance,
            observed,
            provenance: provenance.to_string(),
            passed,
        });
    }

    pub fn expect_eq(&mut self, name: &str, observed: f64, expected: f64, tolerance: f64, provenance: &str) {
        self.push(name, Comparison::Eq, observed, expected, tolerance, provenance);
    }

    pub fn expect_gt(&mut self, name: &str, observed: f64, bound: f64, provenance: &str) {
        self.push(name, Comparison::Gt, observed, bound, 0.0, provenance);
    }

    pub fn expect_le(&mut self, name: &str, observed: f64, bound: f64, tolerance: f64, provenance: &str) {
        self.push(name, Comparison::Le, observed, bound, tolerance, provenance);
    }

    /// Records whether a verdict holds as a 0/1 expectation.
    pub fn expect_holds(&mut self, v: &RelationVerdict, holds: bool, provenance: &str) {
        let name = format!("{}_holds", v.relation.replace('-', "_"));
        self.expect_eq(&name, f64::from(u8::from(v.holds)), f64::from(u8::from(holds)), 0.0, provenance);
    }
}

type Runner = fn(&mut Ctx) -> Result<()>;

struct Entry {
    info: ScenarioInfo,
    run: Runner,
}

fn registry() -> Vec<Entry> {
    library::entries()
        .into_iter()
        .map(|(name, kind, summary, params, run)| Entry {
            info: ScenarioInfo {
                name,
                kind,
                summary,
                parameters: params.iter().copied().collect(),
            },
            run,
        })
        .collect()
}

/// Every bundled scenario, sorted by name.
pub fn list_scenarios() -> Vec<ScenarioInfo> {
    let mut v: Vec<ScenarioInfo> = registry().into_iter().map(|e| e.info).collect();
    v.sort_by_key(|i| i.name);
    v
}

/// Runs a scenario with parameter overrides.
///
/// Errors: [`QmuError::UnknownScenario`] for a bad name, [`QmuError::Parse`]
/// for an unknown parameter, numerical errors from the model itself. A
/// failed expectation is not an error; it shows up as `passed: false`.
pub fn run_scenario(name: &str, overrides: &BTreeMap<String, f64>, config: &RunConfig) -> Result<ScenarioReport> {
    let entry = registry()
        .into_iter()
        .find(|e| e.info.name == name)
        .ok_or_else(|| QmuError::UnknownScenario(name.to_string()))?;
    let mut params: BTreeMap<String, f64> = entry
        .info
        .parameters
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    for (k, v) in overrides {
        match params.get_mut(k) {
            Some(slot) if v.is_finite() => *slot = *v,
            Some(_) => return Err(QmuError::Parse(format!("parameter {k} must be finite"))),
            None => {
                return Err(QmuError::Parse(format!(
                    "scenario {name} has no parameter {k}"
                )))
            }
        }
    }
    let mut ctx = Ctx {
        params,
        config: *config,
        quantities: BTreeMap::new(),
        verdicts: Vec::new(),
        expectations: Vec::new(),
        notes: Vec::new(),
    };
    (entry.run)(&mut ctx)?;
    let passed = ctx.expectations.iter().all(|e| e.passed);
    Ok(ScenarioReport {
        schema: SCHEMA,
        scenario: name.to_string(),
        kind: entry.info.kind,
        seed: config.seed,
        hbar_scale: config.hbar_scale,
        parameters: ctx.params,
        quantities: ctx.quantities,
        verdicts: ctx.verdicts,
        expectations: ctx.expectations,
        notes: ctx.notes,
        passed,
    })
}

/// Parses `key=value` override strings.
pub fn parse_overrides<S: AsRef<str>>(items: &[S]) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for item in items {
        let item = item.as_ref();
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| QmuError::Parse(format!("expected key=value, got {item:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| QmuError::Parse(format!("value of {k} is not a number: {v:?}")))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> RunConfig {
        RunConfig {
            grid_n: 512,
            grid_l: 12.0,
            budget: 500,
            ..RunConfig::default()
        }
    }

    #[test]
    fn names_unique_and_sorted() {
        let l = list_scenarios();
        for w in l.windows(2) {
            assert!(w[0].name < w[1].name);
        }
    }

    #[test]
    fn unknown_scenario_and_parameter() {
        let none = BTreeMap::new();
        assert!(matches!(
            run_scenario("nope", &none, &quick()),
            Err(QmuError::UnknownScenario(_))
        ));
        let bad = parse_overrides(&["zzz=1"]).unwrap();
        assert!(matches!(
            run_scenario("identity-scheme", &bad, &quick()),
            Err(QmuError::Parse(_))
        ));
        assert!(parse_overrides(&["x"]).is_err());
        assert!(parse_overrides(&["x=abc"]).is_err());
    }

    #[test]
    fn every_scenario_passes() {
        for s in list_scenarios() {
            let r = run_scenario(s.name, &BTreeMap::new(), &quick()).unwrap_or_else(|e| panic!("{}: {e}", s.name));
            assert!(r.passed, "{}", r.table());
        }
    }
}
