//! Python bindings. The plain functions here are what the extension module
//! wraps; reports cross the boundary as JSON strings.

use std::collections::BTreeMap;

use qmu_core::errmetrics::{w2_lp_oracle, w2_quantile, Distribution};
use qmu_core::error::Result;
use qmu_core::relations::qubit_error_bound;
use qmu_core::scenarios::{list_scenarios, run_scenario, run_suite, RunConfig};

pub fn config(seed: u64, budget: usize) -> RunConfig {
    RunConfig {
        seed,
        budget,
        ..RunConfig::default()
    }
}

/// Wasserstein-2 deviation; with `oracle` the LP value is returned as well.
pub fn wasserstein(
    support_a: Vec<f64>,
    probs_a: Vec<f64>,
    support_b: Vec<f64>,
    probs_b: Vec<f64>,
    oracle: bool,
) -> Result<(f64, Option<f64>)> {
    let mu = Distribution::new(support_a, probs_a)?;
    let nu = Distribution::new(support_b, probs_b)?;
    let lp = if oracle { Some(w2_lp_oracle(&mu, &nu)?.value) } else { None };
    Ok((w2_quantile(&mu, &nu).value, lp))
}

pub fn scenario_names() -> Vec<String> {
    list_scenarios().into_iter().map(|s| s.name.to_string()).collect()
}

pub fn scenario_json(name: &str, overrides: BTreeMap<String, f64>, seed: u64) -> Result<String> {
    let report = run_scenario(name, &overrides, &config(seed, RunConfig::default().budget))?;
    Ok(serde_json::to_string(&report)?)
}

pub fn check_json(relation: &str, seed: u64, budget: usize) -> Result<String> {
    Ok(serde_json::to_string(&run_suite(relation, &config(seed, budget))?)?)
}

/// `(bound, minimum found)` for the sum of squared qubit errors.
pub fn error_bound(a: [f64; 3], b: [f64; 3]) -> Result<(f64, f64)> {
    let r = qubit_error_bound(a, b)?;
    Ok((r.bound, r.objective))
}

#[cfg(feature = "extension-module")]
#[allow(clippy::useless_conversion)]
mod python {
    use std::collections::BTreeMap;

    use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
    use pyo3::prelude::*;
    use qmu_core::error::QmuError;

    fn to_py(e: QmuError) -> PyErr {
        match e {
            QmuError::UnknownScenario(_) => PyKeyError::new_err(e.to_string()),
            QmuError::Parse(_) | QmuError::InvalidDistribution(_) => PyValueError::new_err(e.to_string()),
            _ => PyRuntimeError::new_err(e.to_string()),
        }
    }

    #[pyfunction]
    #[pyo3(signature = (support_a, probs_a, support_b, probs_b, oracle = false))]
    fn wasserstein(
        support_a: Vec<f64>,
        probs_a: Vec<f64>,
        support_b: Vec<f64>,
        probs_b: Vec<f64>,
        oracle: bool,
    ) -> PyResult<(f64, Option<f64>)> {
        super::wasserstein(support_a, probs_a, support_b, probs_b, oracle).map_err(to_py)
    }

    #[pyfunction]
    fn scenario_names() -> Vec<String> {
        super::scenario_names()
    }

    #[pyfunction]
    #[pyo3(signature = (name, overrides = BTreeMap::new(), seed = 0))]
    fn run_scenario(name: &str, overrides: BTreeMap<String, f64>, seed: u64) -> PyResult<String> {
        super::scenario_json(name, overrides, seed).map_err(to_py)
    }

    #[pyfunction]
    #[pyo3(signature = (relation, seed = 0, budget = 1000))]
    fn check(relation: &str, seed: u64, budget: usize) -> PyResult<String> {
        super::check_json(relation, seed, budget).map_err(to_py)
    }

    #[pyfunction]
    fn error_bound(a: [f64; 3], b: [f64; 3]) -> PyResult<(f64, f64)> {
        super::error_bound(a, b).map_err(to_py)
    }

    #[pymodule]
    fn qmu(m: &Bound<'_, PyModule>) -> PyResult<()> {
        m.add_function(wrap_pyfunction!(wasserstein, m)?)?;
        m.add_function(wrap_pyfunction!(scenario_names, m)?)?;
        m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
        m.add_function(wrap_pyfunction!(check, m)?)?;
        m.add_function(wrap_pyfunction!(error_bound, m)?)?;
        Ok(())
    }
}
