//! Noise-operator error `ε_NO` and disturbance `η_NO` in their equivalent
//! forms.

use serde::{Deserialize, Serialize};

use super::distance::{calibration_error, default_schedule, w2_observables_worst, Bound, StateSearchPolicy};
use super::wasserstein::w2;
use crate::error::{QmuError, Result};
use crate::observables::{product_biobservable, Observable, SharpObservable};
use crate::opalg::{tensor, ComplexMatrix, DensityOperator, HermitianOperator};
use crate::schemes::{Instrument, MeasurementScheme};
use crate::tol;

fn check(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(QmuError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// The two nonnegative terms of `ε_NO²`:
/// `⟨C[x²] - C[x]²⟩_ρ` and `⟨(C[x] - A)²⟩_ρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseTerms {
    pub intrinsic: f64,
    pub deviation: f64,
}

impl NoiseTerms {
    pub fn total(&self) -> f64 {
        self.intrinsic + self.deviation
    }

    pub fn rms(&self) -> f64 {
        self.total().max(0.0).sqrt()
    }
}

pub fn noise_terms(a: &HermitianOperator, c: &Observable, rho: &DensityOperator) -> Result<NoiseTerms> {
    check(a.dim(), c.dim())?;
    check(a.dim(), rho.dim())?;
    let diff = c.first_moment().sub(a);
    Ok(NoiseTerms {
        intrinsic: c.intrinsic_noise().expectation(rho),
        deviation: diff.square().expectation(rho),
    })
}

/// `ε_NO(A, C, ρ)` from the first two moment operators of `C`.
pub fn eps_no_from_moments(a: &HermitianOperator, c: &Observable, rho: &DensityOperator) -> Result<f64> {
    Ok(noise_terms(a, c, rho)?.rms())
}

/// `⟨N²⟩_{ρ⊗σ}` with `N = U†(1⊗Z_f)U - A⊗1`.
pub fn eps_no_from_scheme(
    m: &MeasurementScheme,
    a: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    check(m.object_dim(), a.dim())?;
    let id_o = ComplexMatrix::identity(m.object_dim());
    let id_p = ComplexMatrix::identity(m.probe_dim());
    let out = m.heisenberg(&id_o, m.pointer_operator().matrix());
    let n = &out - &tensor(a.matrix(), &id_p);
    let v = m.joint_expectation(rho, &(&n * &n))?;
    Ok(v.max(0.0).sqrt())
}

/// `η_NO(B, M, ρ)² = ⟨(U†(B⊗1)U - B⊗1)²⟩_{ρ⊗σ}`.
pub fn eta_no_from_scheme(
    m: &MeasurementScheme,
    b: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    check(m.object_dim(), b.dim())?;
    let id_p = ComplexMatrix::identity(m.probe_dim());
    let out = m.heisenberg(b.matrix(), &id_p);
    let d = &out - &tensor(b.matrix(), &id_p);
    let v = m.joint_expectation(rho, &(&d * &d))?;
    Ok(v.max(0.0).sqrt())
}

/// Moment form of `η_NO`: with `B'[xⁿ] = I(Ω)*(Bⁿ)`,
/// `η² = ⟨B'[x²] - B'[x]²⟩ + ⟨(B'[x] - B)²⟩`.
pub fn eta_no_from_instrument(
    i: &Instrument,
    b: &HermitianOperator,
    rho: &DensityOperator,
) -> Result<f64> {
    check(i.dim(), b.dim())?;
    check(i.dim(), rho.dim())?;
    let b1 = HermitianOperator::project(&i.dual_channel(b.matrix()));
    let b2 = HermitianOperator::project(&i.dual_channel(b.square().matrix()));
    let intrinsic = b2.sub(&b1.square()).expectation(rho);
    let deviation = b1.sub(b).square().expectation(rho);
    Ok((intrinsic + deviation).max(0.0).sqrt())
}

/// Three-state form:
/// `ε² = tr(ρA²) + tr(ρC[x²]) + tr(ρC[x]) + tr(ρ₁C[x]) - tr(ρ₂C[x])`
/// with `ρ₁ = AρA` and `ρ₂ = (A+1)ρ(A+1)`.
///
/// `ρ₁`, `ρ₂` are used unnormalized; only the three expectation values of
/// `C[x]` enter, and `tr(ρC) + tr(AρAC) - tr((A+1)ρ(A+1)C) = -2 Re⟨AC⟩_ρ`.
pub fn three_state_eps(a: &HermitianOperator, c: &Observable, rho: &DensityOperator) -> Result<f64> {
    check(a.dim(), c.dim())?;
    check(a.dim(), rho.dim())?;
    let c1 = c.first_moment();
    let c2 = c.moment_operator(2);
    let r = rho.matrix();
    let am = a.matrix();
    let rho1 = &(am * r) * am;
    let ap1 = a.shift(1.0);
    let rho2 = &(ap1.matrix() * r) * ap1.matrix();
    let v = a.square().expectation(rho)
        + c2.expectation(rho)
        + c1.expectation(rho)
        + rho1.trace_product(c1.matrix()).re
        - rho2.trace_product(c1.matrix()).re;
    Ok(v.max(0.0).sqrt())
}

/// Value-comparison error `(∫(x-y)² Re tr(ρA(dx)C(dy)))^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueComparison {
    pub value: f64,
    /// All effects of `A` and `C` commute, so the biprobabilities are a
    /// coupling of `A_ρ` and `C_ρ`.
    pub jointly_measurable: bool,
    pub w2: f64,
}

pub fn value_comparison_eps(
    a: &SharpObservable,
    c: &Observable,
    rho: &DensityOperator,
) -> Result<ValueComparison> {
    let table = product_biobservable(a, c, rho)?;
    let value = table.squared_value_deviation().max(0.0).sqrt();
    let dist = w2(&a.observable().distribution_of(rho)?, &c.distribution_of(rho)?);
    if table.jointly_measurable && value < dist - tol::VERDICT {
        return Err(QmuError::Numerical(format!(
            "value comparison {value} undercuts the Wasserstein deviation {dist} for commuting observables"
        )));
    }
    Ok(ValueComparison {
        value,
        jointly_measurable: table.jointly_measurable,
        w2: dist,
    })
}

/// `c` if `C[x] - A = c·1` within `tol`.
pub fn constant_bias(a: &HermitianOperator, c: &Observable, tol: f64) -> Option<f64> {
    let diff = c.first_moment().sub(a);
    let d = diff.dim();
    let shift = diff.matrix().trace().re / d as f64;
    let rest = diff.shift(-shift);
    (rest.matrix().frobenius_norm() <= tol).then_some(shift)
}

/// All error quantities of an approximator `C` of a sharp target `A` in a
/// state `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub eps_no: f64,
    pub w2_state: f64,
    pub w2_worst: Bound,
    /// `true` when `w2_worst` is a closed-form value rather than a search
    /// lower bound.
    pub w2_worst_exact: bool,
    pub calibration: Bound,
    /// `⟨C[x] - A⟩_ρ`.
    pub bias: f64,
    /// `⟨C[x²] - C[x]²⟩_ρ`.
    pub intrinsic_noise_expectation: f64,
    /// `⟨(C[x] - A)²⟩_ρ`.
    pub squared_deviation: f64,
    /// `c` when `C[x] - A = c·1`.
    pub constant_bias: Option<f64>,
    /// State attaining `w2_worst`.
    pub certifying_state: DensityOperator,
}

pub fn error_report(
    a: &SharpObservable,
    c: &Observable,
    rho: &DensityOperator,
    policy: &StateSearchPolicy,
) -> Result<ErrorReport> {
    let aop = a.operator();
    let terms = noise_terms(&aop, c, rho)?;
    let w2_state = w2(&a.observable().distribution_of(rho)?, &c.distribution_of(rho)?);
    let worst = w2_observables_worst(a.observable(), c, policy)?;
    let cal = calibration_error(a, c, &default_schedule(), policy.seed)?;
    Ok(ErrorReport {
        eps_no: terms.rms(),
        w2_state,
        w2_worst: worst.value,
        w2_worst_exact: worst.exact,
        calibration: Bound::Finite(cal.limit),
        bias: c.first_moment().sub(&aop).expectation(rho),
        intrinsic_noise_expectation: terms.intrinsic,
        squared_deviation: terms.deviation,
        constant_bias: constant_bias(&aop, c, 1e-10),
        certifying_state: DensityOperator::pure(&worst.state)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{spectral_measure, BlochObservable, QubitTriple};
    use crate::opalg::{pauli, random_density, random_hermitian};
    use crate::schemes::library::{identity_scheme, random_qubit_scheme, swap_scheme};
    use crate::schemes::{induced_instrument, induced_observable};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sz() -> SharpObservable {
        spectral_measure(&pauli::hermitian([0.0, 0.0, 1.0]))
    }

    #[test]
    fn triple_zero_at_null_state() {
        let t = QubitTriple::default();
        let obs = t.observable();
        let rho0 = t.null_noise_state();
        let a = t.first_moment();
        assert!(eps_no_from_moments(&a, &obs, &rho0).unwrap() < 1e-10);
        assert!(three_state_eps(&a, &obs, &rho0).unwrap() < 1e-7);
    }

    #[test]
    fn forms_agree_on_random_schemes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let m = random_qubit_scheme(&mut rng);
            let a = random_hermitian(2, &mut rng);
            let rho = random_density(2, &mut rng);
            let c = induced_observable(&m);
            let s = eps_no_from_scheme(&m, &a, &rho).unwrap();
            let mo = eps_no_from_moments(&a, &c, &rho).unwrap();
            let ts = three_state_eps(&a, &c, &rho).unwrap();
            assert!((s * s - mo * mo).abs() < 1e-9);
            assert!((s * s - ts * ts).abs() < 1e-9);
            let b = random_hermitian(2, &mut rng);
            let es = eta_no_from_scheme(&m, &b, &rho).unwrap();
            let ei = eta_no_from_instrument(&induced_instrument(&m), &b, &rho).unwrap();
            assert!((es * es - ei * ei).abs() < 1e-9);
        }
    }

    #[test]
    fn identity_scheme_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sigma = random_density(2, &mut rng);
        let rho = random_density(2, &mut rng);
        let a = sz();
        let m = identity_scheme(&a, &sigma).unwrap();
        let aop = a.operator();
        let eps = eps_no_from_scheme(&m, &aop, &rho).unwrap();
        let (mr, ms) = (aop.expectation(&rho), aop.expectation(&sigma));
        let expect = aop.variance(&rho) + aop.variance(&sigma) + (mr - ms).powi(2);
        assert!((eps * eps - expect).abs() < 1e-12);
        let b = random_hermitian(2, &mut rng);
        assert!(eta_no_from_scheme(&m, &b, &rho).unwrap() < 1e-12);
    }

    #[test]
    fn swap_scheme_example() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sigma = random_density(2, &mut rng);
        let rho = random_density(2, &mut rng);
        let a = sz();
        let m = swap_scheme(&a, &sigma).unwrap();
        assert!(eps_no_from_scheme(&m, &a.operator(), &rho).unwrap() < 1e-12);
        let b = random_hermitian(2, &mut rng);
        let eta = eta_no_from_scheme(&m, &b, &rho).unwrap();
        let (mr, ms) = (b.expectation(&rho), b.expectation(&sigma));
        let expect = b.variance(&rho) + b.variance(&sigma) + (mr - ms).powi(2);
        assert!((eta * eta - expect).abs() < 1e-12);
    }

    #[test]
    fn trivial_approximator() {
        let a = sz();
        let rho = DensityOperator::bloch([0.1, 0.2, 0.5]).unwrap();
        let c = Observable::trivial(&a.observable().distribution_of(&rho).unwrap(), 2);
        let eps = eps_no_from_moments(&a.operator(), &c, &rho).unwrap();
        assert!((eps * eps - 2.0 * a.operator().variance(&rho)).abs() < 1e-12);
        let vc = value_comparison_eps(&a, &c, &rho).unwrap();
        assert!(vc.jointly_measurable);
        assert!((vc.value - eps).abs() < 1e-12);
        assert!(vc.w2 < 1e-12);
    }

    #[test]
    fn covariant_state_independent() {
        let a = [0.0, 0.0, 1.0];
        let cv = [0.2, -0.1, 0.6];
        let c = BlochObservable::covariant(cv).unwrap().observable();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let expect = 1.0 - crate::opalg::dot3(cv, cv) + crate::opalg::dot3(
            crate::opalg::sub3(a, cv),
            crate::opalg::sub3(a, cv),
        );
        for _ in 0..10 {
            let rho = random_density(2, &mut rng);
            let e = eps_no_from_moments(&sz().operator(), &c, &rho).unwrap();
            assert!((e * e - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_bias_detected() {
        let a = sz();
        let shifted = a.observable().relabel(|x| x + 0.25).unwrap();
        assert_eq!(constant_bias(&a.operator(), &shifted, 1e-12).map(|b| (b * 1e12).round()), Some(0.25e12));
        let c = BlochObservable::covariant([0.5, 0.0, 0.0]).unwrap().observable();
        assert!(constant_bias(&a.operator(), &c, 1e-12).is_none());
    }

    #[test]
    fn report_decomposition() {
        let a = sz();
        let c = BlochObservable::covariant([0.1, 0.0, 0.7]).unwrap().observable();
        let rho = DensityOperator::bloch([0.3, 0.3, 0.3]).unwrap();
        let r = error_report(&a, &c, &rho, &StateSearchPolicy::default()).unwrap();
        assert!((r.eps_no.powi(2) - r.intrinsic_noise_expectation - r.squared_deviation).abs() < 1e-12);
        assert!(r.w2_worst_exact);
        assert!(r.calibration.finite().unwrap() <= r.w2_worst.finite().unwrap() + 1e-12);
    }
}
