//! Covariant qubit joint measurements and the additive error relations for
//! a pair of spin observables `a·σ`, `b·σ`.

use serde::{Deserialize, Serialize};

use super::search::{nelder_mead, NelderMead};
use super::{branciard_verdict, commutator_expectation, require_pure, RelationVerdict};
use crate::errmetrics::noise::eps_no_from_moments;
use crate::error::{QmuError, Result};
use crate::observables::BlochObservable;
use crate::opalg::{
    add3, dot3, norm3, pauli, scale3, sub3, ComplexMatrix, DensityOperator, HermitianOperator,
};
use crate::schemes::JointObservable;

const FEASIBILITY: f64 = 1e-12;
const PSD: f64 = 1e-10;

/// Joint observable `G_jk = ¼[(1 + jkγ₀)1 + (jc + kd)·σ]`, `j, k = ±1`,
/// approximating `a·σ` by its first marginal and `b·σ` by its second.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitJointModel {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub d: [f64; 3],
    pub gamma0: f64,
}

fn unit(v: [f64; 3], what: &str) -> Result<[f64; 3]> {
    let n = norm3(v);
    if (n - 1.0).abs() > 1e-10 {
        return Err(QmuError::InvalidObservable(format!(
            "{what} has norm {n}, expected a unit vector"
        )));
    }
    Ok(v)
}

/// Builds the joint model when `‖c+d‖ + ‖c-d‖ ≤ 2`, with
/// `γ₀ = (‖c+d‖ - ‖c-d‖)/2`; returns `None` otherwise. Positivity of the four
/// effects is checked numerically.
pub fn qubit_joint_feasible(
    a: [f64; 3],
    b: [f64; 3],
    c: [f64; 3],
    d: [f64; 3],
) -> Result<Option<QubitJointModel>> {
    let a = unit(a, "a")?;
    let b = unit(b, "b")?;
    for (v, name) in [(c, "c"), (d, "d")] {
        if norm3(v) > 1.0 + FEASIBILITY {
            return Err(QmuError::InvalidObservable(format!(
                "{name} lies outside the Bloch ball"
            )));
        }
    }
    let s = norm3(add3(c, d));
    let t = norm3(sub3(c, d));
    if s + t > 2.0 + FEASIBILITY {
        return Ok(None);
    }
    let model = QubitJointModel {
        a,
        b,
        c,
        d,
        gamma0: 0.5 * (s - t),
    };
    let worst = model.min_effect_eigenvalue();
    if worst < -PSD {
        return Err(QmuError::Numerical(format!(
            "joint effect has eigenvalue {worst}"
        )));
    }
    Ok(Some(model))
}

impl QubitJointModel {
    /// Effects indexed `[j][k]` with `j, k` running over `-1, +1`.
    pub fn effects(&self) -> [[ComplexMatrix; 2]; 2] {
        let g = |j: f64, k: f64| {
            let v = add3(scale3(self.c, j), scale3(self.d, k));
            (&ComplexMatrix::identity(2).scale(1.0 + j * k * self.gamma0) + &pauli::dot(v)).scale(0.25)
        };
        [[g(-1.0, -1.0), g(-1.0, 1.0)], [g(1.0, -1.0), g(1.0, 1.0)]]
    }

    pub fn min_effect_eigenvalue(&self) -> f64 {
        self.effects()
            .iter()
            .flatten()
            .map(|e| HermitianOperator::project(e).min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// Joint observable with outcomes `±scale_c` and `±scale_d`.
    pub fn joint_observable(&self, scale_c: f64, scale_d: f64) -> JointObservable {
        let e = self.effects();
        JointObservable {
            row_outcomes: vec![-scale_c, scale_c],
            col_outcomes: vec![-scale_d, scale_d],
            effects: e.iter().map(|row| row.to_vec()).collect(),
        }
    }

    /// Rescales outcomes so that both marginals are unbiased: requires
    /// `c = t a`, `d = s b` with `t, s > 0`, and uses outcomes `±1/t`, `±1/s`.
    pub fn unbiased_joint(&self) -> Result<JointObservable> {
        let scale = |v: [f64; 3], target: [f64; 3]| -> Result<f64> {
            let t = dot3(v, target);
            let off = norm3(sub3(v, scale3(target, t)));
            if t <= 0.0 || off > 1e-12 {
                return Err(QmuError::Biased { bias: off.max(1.0 - t) });
            }
            Ok(1.0 / t)
        };
        Ok(self.joint_observable(scale(self.c, self.a)?, scale(self.d, self.b)?))
    }

    pub fn first_marginal(&self) -> BlochObservable {
        BlochObservable { c0: 1.0, c: self.c }
    }

    pub fn second_marginal(&self) -> BlochObservable {
        BlochObservable { c0: 1.0, c: self.d }
    }

    /// `Δ(A, C)² + Δ(B, D)² = 2‖a - c‖ + 2‖b - d‖`.
    pub fn squared_error_sum(&self) -> f64 {
        2.0 * norm3(sub3(self.a, self.c)) + 2.0 * norm3(sub3(self.b, self.d))
    }

    /// State-independent `ε_NO² = 1 - ‖c‖² + ‖a - c‖²` for each marginal.
    pub fn eps_no_closed_form(&self) -> (f64, f64) {
        let e = |t: [f64; 3], v: [f64; 3]| (1.0 - dot3(v, v) + dot3(sub3(t, v), sub3(t, v))).max(0.0).sqrt();
        (e(self.a, self.c), e(self.b, self.d))
    }
}

/// `√2 [‖a - b‖ + ‖a + b‖ - 2]`.
pub fn incompatibility_bound(a: [f64; 3], b: [f64; 3]) -> f64 {
    std::f64::consts::SQRT_2 * (norm3(sub3(a, b)) + norm3(add3(a, b)) - 2.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorBoundSearch {
    pub bound: f64,
    /// Smallest `Δ(A,C)² + Δ(B,D)²` found over feasible covariant pairs.
    pub objective: f64,
    pub model: QubitJointModel,
    pub evaluations: usize,
}

/// Scales `(c, d)` onto the feasible set `‖c+d‖ + ‖c-d‖ ≤ 2`.
fn project(c: [f64; 3], d: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let s = norm3(add3(c, d)) + norm3(sub3(c, d));
    if s > 2.0 {
        (scale3(c, 2.0 / s), scale3(d, 2.0 / s))
    } else {
        (c, d)
    }
}

/// Minimizes `Δ(A,C)² + Δ(B,D)²` over jointly measurable covariant pairs.
///
/// First over `c = αa`, `d = βb` (for each α the largest feasible β, then a
/// golden-section search in α), then a Nelder–Mead pass over all six
/// coordinates starting from the restricted optimum.
pub fn qubit_error_bound(a: [f64; 3], b: [f64; 3]) -> Result<ErrorBoundSearch> {
    let a = unit(a, "a")?;
    let b = unit(b, "b")?;
    let mut evaluations = 0usize;
    let g = |al: f64, be: f64| {
        let (c, d) = (scale3(a, al), scale3(b, be));
        norm3(add3(c, d)) + norm3(sub3(c, d))
    };
    let beta_max = |al: f64| -> f64 {
        if g(al, 1.0) <= 2.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if g(al, mid) <= 2.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };
    let h = |al: f64| 2.0 * (1.0 - al) + 2.0 * (1.0 - beta_max(al));

    let n = 200;
    let mut best_k = 0usize;
    let mut best_v = f64::INFINITY;
    for k in 0..=n {
        let v = h(k as f64 / n as f64);
        evaluations += 1;
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let (mut lo, mut hi) = (
        (best_k.saturating_sub(1)) as f64 / n as f64,
        ((best_k + 1).min(n)) as f64 / n as f64,
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        evaluations += 2;
        if h(x1) <= h(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    if h(alpha) > best_v {
        alpha = best_k as f64 / n as f64;
    }
    let beta = beta_max(alpha);
    let (mut c, mut d) = project(scale3(a, alpha), scale3(b, beta));

    let objective = |c: [f64; 3], d: [f64; 3]| 2.0 * norm3(sub3(a, c)) + 2.0 * norm3(sub3(b, d));
    let mut value = objective(c, d);
    let x0: Vec<f64> = c.iter().chain(d.iter()).copied().collect();
    let m = nelder_mead(
        |x| {
            let (pc, pd) = project([x[0], x[1], x[2]], [x[3], x[4], x[5]]);
            objective(pc, pd)
        },
        &x0,
        NelderMead {
            max_evals: 4000,
            initial_step: 0.02,
            tolerance: 1e-15,
        },
    );
    evaluations += m.evaluations;
    if m.value < value {
        let (pc, pd) = project(
            [m.point[0], m.point[1], m.point[2]],
            [m.point[3], m.point[4], m.point[5]],
        );
        c = pc;
        d = pd;
        value = objective(c, d);
    }
    let model = qubit_joint_feasible(a, b, c, d)?.ok_or_else(|| {
        QmuError::Numerical("error-bound optimizer left the feasible set".into())
    })?;
    Ok(ErrorBoundSearch {
        bound: incompatibility_bound(a, b),
        objective: value,
        model,
        evaluations,
    })
}

/// `ε_NO(A) + ε_NO(B) ≥ (1/√2)[‖a - b‖ + ‖a + b‖ - 2]` for the marginals of
/// a covariant joint model.
pub fn qubit_epsno_sum_check(model: &QubitJointModel, rho: &DensityOperator) -> Result<RelationVerdict> {
    let ea = eps_no_from_moments(&pauli::hermitian(model.a), &model.first_marginal().observable(), rho)?;
    let eb = eps_no_from_moments(&pauli::hermitian(model.b), &model.second_marginal().observable(), rho)?;
    let rhs = incompatibility_bound(model.a, model.b) / 2.0;
    let (ca, cb) = model.eps_no_closed_form();
    Ok(RelationVerdict::new("qubit-epsno-sum", ea + eb, rhs)
        .witness("eps_a", ea)
        .witness("eps_b", eb)
        .witness("eps_a_closed_form", ca)
        .witness("eps_b_closed_form", cb))
}

/// Joint-measurement form of Branciard's relation for the two marginals of
/// a covariant model at a pure state.
pub fn check_branciard_joint(model: &QubitJointModel, rho: &DensityOperator) -> Result<RelationVerdict> {
    require_pure(rho)?;
    let (a, b) = (pauli::hermitian(model.a), pauli::hermitian(model.b));
    let ea = eps_no_from_moments(&a, &model.first_marginal().observable(), rho)?;
    let eb = eps_no_from_moments(&b, &model.second_marginal().observable(), rho)?;
    Ok(branciard_verdict(
        ea,
        eb,
        a.variance(rho).max(0.0).sqrt(),
        b.variance(rho).max(0.0).sqrt(),
        commutator_expectation(&a, &b, rho),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relations::check_unbiased_tradeoffs;
    use std::f64::consts::FRAC_1_SQRT_2;

    const X: [f64; 3] = [1.0, 0.0, 0.0];
    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    #[test]
    fn trivial_model() {
        let m = qubit_joint_feasible(Z, X, [0.0; 3], [0.0; 3]).unwrap().unwrap();
        assert_eq!(m.gamma0, 0.0);
        for e in m.effects().iter().flatten() {
            assert!(e.is_close(&ComplexMatrix::identity(2).scale(0.25), 1e-15));
        }
    }

    #[test]
    fn sharp_pair_infeasible() {
        assert!(qubit_joint_feasible(Z, X, Z, X).unwrap().is_none());
    }

    #[test]
    fn scaled_pair_feasible_and_rank_deficient() {
        let m = qubit_joint_feasible(Z, X, scale3(Z, FRAC_1_SQRT_2), scale3(X, FRAC_1_SQRT_2))
            .unwrap()
            .unwrap();
        assert!(m.gamma0.abs() < 1e-15);
        assert!(m.min_effect_eigenvalue().abs() < 1e-12);
    }

    #[test]
    fn marginals_match() {
        let c = [0.3, 0.1, 0.4];
        let d = [-0.2, 0.5, 0.1];
        let m = qubit_joint_feasible(Z, X, c, d).unwrap().unwrap();
        let j = m.joint_observable(1.0, 1.0);
        let f = j.first_marginal();
        assert!(f.effects()[1].is_close(&BlochObservable::covariant(c).unwrap().plus_effect(), 1e-14));
        let s = j.second_marginal();
        assert!(s.effects()[1].is_close(&BlochObservable::covariant(d).unwrap().plus_effect(), 1e-14));
    }

    #[test]
    fn orthogonal_bound_attained() {
        let r = qubit_error_bound(Z, X).unwrap();
        let target = 4.0 - 2.0 * 2f64.sqrt();
        assert!((r.bound - target).abs() < 1e-12);
        assert!((r.objective - target).abs() < 1e-4);
        assert!(r.objective >= r.bound - 1e-9);
        assert!(norm3(sub3(r.model.c, scale3(Z, FRAC_1_SQRT_2))) < 1e-3);
    }

    #[test]
    fn compatible_pairs_have_zero_bound() {
        for b in [Z, scale3(Z, -1.0)] {
            let r = qubit_error_bound(Z, b).unwrap();
            assert!(r.bound.abs() < 1e-12);
            assert!(r.objective < 1e-6);
        }
    }

    #[test]
    fn unbiased_optimal_model_tradeoffs() {
        let m = qubit_joint_feasible(Z, X, scale3(Z, FRAC_1_SQRT_2), scale3(X, FRAC_1_SQRT_2))
            .unwrap()
            .unwrap();
        let g = m.unbiased_joint().unwrap();
        let rho = DensityOperator::bloch([0.0, 1.0, 0.0]).unwrap();
        let v = check_unbiased_tradeoffs(&g, &pauli::hermitian(Z), &pauli::hermitian(X), &rho).unwrap();
        // V(C) = (1/t² - 1)·1 = 1 with t = 1/√2; |⟨[σ₃,σ₁]⟩| = 2
        assert!((v[0].lhs - 1.0).abs() < 1e-12 && (v[0].rhs - 1.0).abs() < 1e-12);
        assert!(v.iter().all(|x| x.holds));
    }

    #[test]
    fn biased_model_rejected() {
        let m = qubit_joint_feasible(Z, X, [0.0, 0.3, 0.3], scale3(X, 0.5)).unwrap().unwrap();
        assert!(matches!(m.unbiased_joint(), Err(QmuError::Biased { .. })));
        let g = m.joint_observable(1.0, 2.0);
        let rho = DensityOperator::bloch(Z).unwrap();
        assert!(matches!(
            check_unbiased_tradeoffs(&g, &pauli::hermitian(Z), &pauli::hermitian(X), &rho),
            Err(QmuError::Biased { .. })
        ));
    }

    #[test]
    fn eps_sum_closed_form() {
        let m = qubit_joint_feasible(Z, X, scale3(Z, FRAC_1_SQRT_2), scale3(X, FRAC_1_SQRT_2))
            .unwrap()
            .unwrap();
        let rho = DensityOperator::bloch([0.2, 0.5, -0.1]).unwrap();
        let v = qubit_epsno_sum_check(&m, &rho).unwrap();
        let (ca, cb) = m.eps_no_closed_form();
        assert!((v.lhs - ca - cb).abs() < 1e-12);
        assert!(v.holds);
    }
}
