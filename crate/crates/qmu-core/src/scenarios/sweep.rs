//! One-parameter relation sweeps written as tidy CSV.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::RunConfig;
use crate::error::{QmuError, Result};
use crate::observables::spectral_measure;
use crate::opalg::{pauli, scale3, DensityOperator};
use crate::relations::{
    check_branciard_joint, check_naive_heisenberg, check_ozawa, error_disturbance,
    phase_space_relation_check, qubit_epsno_sum_check, qubit_error_bound, qubit_joint_feasible,
    RelationVerdict,
};
use crate::schemes::grid::GridState;
use crate::schemes::library::swap_scheme;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl From<(f64, RelationVerdict)> for SweepRow {
    fn from((parameter, v): (f64, RelationVerdict)) -> Self {
        Self {
            parameter,
            lhs: v.lhs,
            rhs: v.rhs,
            slack: v.slack,
            holds: v.holds,
        }
    }
}

/// Relations with a one-parameter family, and what the parameter is.
pub fn sweep_names() -> &'static [(&'static str, &'static str)] {
    &[
        ("branciard", "scale u of the covariant pair c = u·a/√2, d = u·b/√2 (a ⊥ b), state along y"),
        ("eps-sum", "angle between a and b, optimal covariant pair"),
        ("naive-heisenberg", "polar angle of the state in the y-z plane, swap scheme with σ = ρ"),
        ("ozawa", "polar angle of the state in the y-z plane, swap scheme with σ = ρ"),
        ("phase-space", "squeezing factor of the generating Gaussian"),
        ("theorem3", "angle between a and b"),
    ]
}

const Z: [f64; 3] = [0.0, 0.0, 1.0];
const X: [f64; 3] = [1.0, 0.0, 0.0];

fn yz_state(theta: f64) -> Result<DensityOperator> {
    DensityOperator::bloch([0.0, theta.sin(), theta.cos()])
}

fn swap_point(theta: f64, naive: bool) -> Result<RelationVerdict> {
    let rho = yz_state(theta)?;
    let a = spectral_measure(&pauli::hermitian(Z));
    let m = swap_scheme(&a, &rho)?;
    let q = error_disturbance(&m, &a.operator(), &pauli::hermitian(X), &rho)?;
    Ok(if naive { check_naive_heisenberg(&q) } else { check_ozawa(&q) })
}

fn point(relation: &str, t: f64, config: &RunConfig) -> Result<RelationVerdict> {
    match relation {
        "theorem3" => {
            let r = qubit_error_bound(Z, [t.sin(), 0.0, t.cos()])?;
            Ok(RelationVerdict::new("theorem3", r.objective, r.bound))
        }
        "eps-sum" => {
            let r = qubit_error_bound(Z, [t.sin(), 0.0, t.cos()])?;
            qubit_epsno_sum_check(&r.model, &yz_state(FRAC_PI_2)?)
        }
        "naive-heisenberg" => swap_point(t, true),
        "ozawa" => swap_point(t, false),
        "branciard" => {
            let s = t * FRAC_1_SQRT_2;
            let model = qubit_joint_feasible(Z, X, scale3(Z, s), scale3(X, s))?
                .ok_or_else(|| QmuError::InvalidScheme(format!("scale {t} is not jointly measurable")))?;
            check_branciard_joint(&model, &yz_state(FRAC_PI_2)?)
        }
        "phase-space" => {
            let tau = GridState::squeezed(config.grid()?, t)?;
            let [_, v] = phase_space_relation_check(&tau)?;
            Ok(v)
        }
        other => Err(QmuError::Parse(format!("unknown relation {other:?}"))),
    }
}

/// Evaluates `relation` at `points` evenly spaced parameter values.
pub fn sweep(relation: &str, from: f64, to: f64, points: usize, config: &RunConfig) -> Result<Vec<SweepRow>> {
    if !sweep_names().iter().any(|(n, _)| *n == relation) {
        return Err(QmuError::Parse(format!("unknown relation {relation:?}")));
    }
    if points == 0 || !from.is_finite() || !to.is_finite() {
        return Err(QmuError::Parse("sweep needs at least one point and a finite range".into()));
    }
    (0..points)
        .map(|k| {
            let t = if points == 1 {
                from
            } else {
                from + (to - from) * k as f64 / (points - 1) as f64
            };
            Ok(SweepRow::from((t, point(relation, t, config)?)))
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    write_sweep_rows(rows, std::fs::File::create(path)?)
}

pub fn write_sweep_rows<W: Write>(rows: &[SweepRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem3_sweep_nonnegative() {
        let rows = sweep("theorem3", 0.0, FRAC_PI_2, 11, &RunConfig::default()).unwrap();
        assert!(rows.iter().all(|r| r.slack >= -1e-9));
    }

    #[test]
    fn naive_sweep_has_violations() {
        let rows = sweep("naive-heisenberg", 0.0, std::f64::consts::PI, 9, &RunConfig::default()).unwrap();
        assert!(rows.iter().any(|r| !r.holds));
        let oz = sweep("ozawa", 0.0, std::f64::consts::PI, 9, &RunConfig::default()).unwrap();
        assert!(oz.iter().all(|r| r.holds));
    }

    #[test]
    fn unknown_relation() {
        assert!(sweep("x", 0.0, 1.0, 3, &RunConfig::default()).is_err());
    }
}
