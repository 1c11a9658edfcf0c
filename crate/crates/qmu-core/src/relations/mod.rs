//! Checkers for error-disturbance, joint-measurement and preparation
//! uncertainty relations.
//!
//! Every checker returns a [`RelationVerdict`] with `slack = lhs - rhs`; the
//! relation holds when `slack ≥ -1e-9`.

pub mod qubit;
pub mod search;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::errmetrics::noise::{eps_no_from_moments, eps_no_from_scheme, eta_no_from_scheme};
use crate::error::{QmuError, Result};
use crate::opalg::{DensityOperator, HermitianOperator};
use crate::schemes::grid::{phase_space_marginals, GridState};
use crate::schemes::{JointObservable, MeasurementScheme};
use crate::tol;

pub use qubit::{
    check_branciard_joint, qubit_epsno_sum_check, qubit_error_bound, qubit_joint_feasible,
    ErrorBoundSearch, QubitJointModel,
};
pub use search::{nelder_mead, search_violation, Minimum, NelderMead, ViolationSearch};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelationVerdict {
    pub relation: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
    pub witnesses: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl RelationVerdict {
    pub fn new(relation: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            relation: relation.into(),
            lhs,
            rhs,
            slack,
            holds: slack >= -tol::VERDICT,
            witnesses: BTreeMap::new(),
            note: None,
        }
    }

    pub fn witness(mut self, key: &str, value: impl Serialize) -> Self {
        self.witnesses.insert(
            key.to_string(),
            serde_json::to_value(value).unwrap_or(Value::Null),
        );
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

/// `|tr ρ[A, B]|`.
pub fn commutator_expectation(a: &HermitianOperator, b: &HermitianOperator, rho: &DensityOperator) -> f64 {
    rho.matrix()
        .trace_product(&a.matrix().commutator(b.matrix()))
        .norm()
}

/// Quantities entering the error-disturbance relations for one scheme and
/// state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorDisturbance {
    pub eps: f64,
    pub eta: f64,
    pub delta_a: f64,
    pub delta_b: f64,
    /// `|tr ρ[A, B]|`.
    pub commutator: f64,
}

pub fn error_disturbance(
    m: &MeasurementScheme,
    a: &HermitianOperator,
    b: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<ErrorDisturbance> {
    Ok(ErrorDisturbance {
        eps: eps_no_from_scheme(m, a, rho)?,
        eta: eta_no_from_scheme(m, b, rho)?,
        delta_a: a.variance(rho).max(0.0).sqrt(),
        delta_b: b.variance(rho).max(0.0).sqrt(),
        commutator: commutator_expectation(a, b, rho),
    })
}

fn with_inputs(v: RelationVerdict, q: &ErrorDisturbance) -> RelationVerdict {
    v.witness("eps", q.eps)
        .witness("eta", q.eta)
        .witness("delta_a", q.delta_a)
        .witness("delta_b", q.delta_b)
        .witness("commutator", q.commutator)
}

/// `εη + εΔ(B_ρ) + Δ(A_ρ)η ≥ ½|⟨[A,B]⟩|`.
pub fn check_ozawa(q: &ErrorDisturbance) -> RelationVerdict {
    let lhs = q.eps * q.eta + q.eps * q.delta_b + q.delta_a * q.eta;
    with_inputs(RelationVerdict::new("ozawa", lhs, 0.5 * q.commutator), q)
}

/// `εη ≥ ½|⟨[A,B]⟩|`, which fails in general.
pub fn check_naive_heisenberg(q: &ErrorDisturbance) -> RelationVerdict {
    with_inputs(
        RelationVerdict::new("naive-heisenberg", q.eps * q.eta, 0.5 * q.commutator),
        q,
    )
}

/// Branciard's bound for a pure state, with `e_a`, `e_b` the two errors (or
/// error and disturbance):
/// `e_a²Δ_B² + e_b²Δ_A² + 2√(Δ_A²Δ_B² - ¼C²) e_a e_b ≥ ¼C²`.
pub fn branciard_verdict(e_a: f64, e_b: f64, delta_a: f64, delta_b: f64, commutator: f64) -> RelationVerdict {
    let (da2, db2) = (delta_a * delta_a, delta_b * delta_b);
    let quarter = 0.25 * commutator * commutator;
    let root = (da2 * db2 - quarter).max(0.0).sqrt();
    let lhs = e_a * e_a * db2 + e_b * e_b * da2 + 2.0 * root * e_a * e_b;
    RelationVerdict::new("branciard", lhs, quarter)
        .witness("e_a", e_a)
        .witness("e_b", e_b)
        .witness("delta_a", delta_a)
        .witness("delta_b", delta_b)
        .witness("commutator", commutator)
}

pub(crate) fn require_pure(rho: &DensityOperator) -> Result<()> {
    let purity = rho.purity();
    if purity < 1.0 - tol::PURITY {
        return Err(QmuError::MixedState { purity });
    }
    Ok(())
}

/// Error-disturbance form of Branciard's relation for a scheme; the state
/// must be pure.
pub fn check_branciard(q: &ErrorDisturbance, rho: &DensityOperator) -> Result<RelationVerdict> {
    require_pure(rho)?;
    Ok(branciard_verdict(q.eps, q.eta, q.delta_a, q.delta_b, q.commutator))
}

/// Largest `‖F[x] - T‖` (Frobenius) over the two marginals.
fn bias_of(f: &crate::observables::Observable, target: &HermitianOperator) -> f64 {
    (f.first_moment().matrix() - target.matrix()).frobenius_norm()
}

/// Trade-offs for a joint observable whose marginals `C`, `D` are unbiased
/// approximators of `A`, `B`:
///
/// - `⟨V(C)⟩⟨V(D)⟩ ≥ ¼|⟨[A,B]⟩|²`
/// - `Δ(C_ρ)Δ(D_ρ) ≥ |⟨[A,B]⟩|`
/// - `ε_NO(A)ε_NO(B) ≥ ½|⟨[A,B]⟩|`
pub fn check_unbiased_tradeoffs(
    g: &JointObservable,
    a: &HermitianOperator,
    b: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<[RelationVerdict; 3]> {
    let cm = g.first_marginal();
    let dm = g.second_marginal();
    let bias = bias_of(&cm, a).max(bias_of(&dm, b));
    if bias > 1e-10 {
        return Err(QmuError::Biased { bias });
    }
    let comm = commutator_expectation(a, b, rho);
    let vc = cm.intrinsic_noise().expectation(rho);
    let vd = dm.intrinsic_noise().expectation(rho);
    let sd = |f: &crate::observables::Observable| -> Result<f64> {
        Ok(f.distribution_of(rho)?.std_dev())
    };
    let (sc, sdd) = (sd(&cm)?, sd(&dm)?);
    let (ea, eb) = (eps_no_from_moments(a, &cm, rho)?, eps_no_from_moments(b, &dm, rho)?);
    Ok([
        RelationVerdict::new("unbiased-intrinsic-noise", vc * vd, 0.25 * comm * comm)
            .witness("intrinsic_c", vc)
            .witness("intrinsic_d", vd),
        RelationVerdict::new("unbiased-std-dev", sc * sdd, comm)
            .witness("std_c", sc)
            .witness("std_d", sdd)
            .with_note("bound is |tr ρ[A,B]| without a factor ½"),
        RelationVerdict::new("unbiased-eps-product", ea * eb, 0.5 * comm)
            .witness("eps_a", ea)
            .witness("eps_b", eb),
    ])
}

/// For a covariant phase-space measurement generated by `τ`:
/// `μ[x²]ν[x²] ≥ Δ(μ)²Δ(ν)²` and `Δ(μ)²Δ(ν)² ≥ ¼`.
pub fn phase_space_relation_check(tau: &GridState) -> Result<[RelationVerdict; 2]> {
    let (mu, nu) = phase_space_marginals(tau)?;
    let second = mu.second_moment() * nu.second_moment();
    let variances = mu.variance() * nu.variance();
    Ok([
        RelationVerdict::new("phase-space-moments", second, variances)
            .witness("mu_second_moment", mu.second_moment())
            .witness("nu_second_moment", nu.second_moment()),
        RelationVerdict::new("phase-space-variances", variances, 0.25)
            .witness("mu_std", mu.std_dev())
            .witness("nu_std", nu.std_dev()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::spectral_measure;
    use crate::opalg::pauli;
    use crate::schemes::grid::GridSystem;
    use crate::schemes::library::{identity_scheme, swap_scheme};

    fn sigma(v: [f64; 3]) -> HermitianOperator {
        pauli::hermitian(v)
    }

    #[test]
    fn identity_scheme_violates_naive_only() {
        let (a, b) = (sigma([0.0, 0.0, 1.0]), sigma([1.0, 0.0, 0.0]));
        let rho = DensityOperator::bloch([0.0, 1.0, 0.0]).unwrap();
        let m = identity_scheme(&spectral_measure(&a), &rho).unwrap();
        let q = error_disturbance(&m, &a, &b, &rho).unwrap();
        assert!(q.eta.abs() < 1e-12);
        // ⟨[σ₃,σ₁]⟩ = 2i⟨σ₂⟩
        assert!((q.commutator - 2.0).abs() < 1e-12);
        assert!(!check_naive_heisenberg(&q).holds);
        assert!(check_ozawa(&q).holds);
        assert!(check_branciard(&q, &rho).unwrap().holds);
    }

    #[test]
    fn swap_scheme_at_input_state() {
        let (a, b) = (sigma([0.0, 0.0, 1.0]), sigma([1.0, 0.0, 0.0]));
        let rho = DensityOperator::bloch([0.0, 1.0, 0.0]).unwrap();
        let m = swap_scheme(&spectral_measure(&a), &rho).unwrap();
        let q = error_disturbance(&m, &a, &b, &rho).unwrap();
        assert!(q.eps.abs() < 1e-7);
        assert!(!check_naive_heisenberg(&q).holds);
        let oz = check_ozawa(&q);
        assert!(oz.holds, "{oz:?}");
    }

    #[test]
    fn branciard_rejects_mixed() {
        let rho = DensityOperator::bloch([0.0, 0.3, 0.0]).unwrap();
        let q = ErrorDisturbance {
            eps: 1.0,
            eta: 1.0,
            delta_a: 1.0,
            delta_b: 1.0,
            commutator: 0.6,
        };
        assert!(matches!(check_branciard(&q, &rho), Err(QmuError::MixedState { .. })));
    }

    #[test]
    fn commuting_pair_trivial() {
        let v = branciard_verdict(0.0, 0.0, 1.0, 1.0, 0.0);
        assert!(v.holds && v.rhs == 0.0);
    }

    #[test]
    fn phase_space_ground_state() {
        let g = GridSystem::new(1024, 12.0).unwrap();
        let [m, v] = phase_space_relation_check(&GridState::ground_state(g).unwrap()).unwrap();
        assert!(m.slack.abs() < 1e-9 && v.slack.abs() < 1e-9);
        let [m, v] = phase_space_relation_check(&GridState::coherent(g, 1.0, 0.5).unwrap()).unwrap();
        assert!(m.slack > 0.1 && v.holds);
    }

    #[test]
    fn verdict_json_shape() {
        let v = RelationVerdict::new("x", 1.0, 0.5).witness("k", 2.0);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(
            s,
            r#"{"relation":"x","lhs":1.0,"rhs":0.5,"slack":0.5,"holds":true,"witnesses":{"k":2.0}}"#
        );
    }
}
