//! Observable-level distances: the worst case of the state-wise Wasserstein
//! deviation and the calibration error.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::distribution::Distribution;
use super::wasserstein::w2;
use crate::error::{QmuError, Result};
use crate::observables::{Observable, SharpObservable};
use crate::opalg::{
    c, eig_hermitian, norm3, pauli, random_pure_vector, scale3, sub3, CVector, ComplexMatrix,
    DensityOperator, HermitianOperator,
};
use crate::rng;

/// A supremum that is either a finite number or flagged as unbounded.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bound {
    Finite(f64),
    Infinite,
}

impl Bound {
    pub fn finite(&self) -> Option<f64> {
        match self {
            Bound::Finite(x) => Some(*x),
            Bound::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Bound::Infinite)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(x) => write!(f, "{x}"),
            Bound::Infinite => f.write_str("+inf"),
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(x) => s.serialize_f64(*x),
            Bound::Infinite => s.serialize_str("+inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Bound {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(Bound::Finite(x)),
            Repr::Text(t) if t == "+inf" => Ok(Bound::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad bound `{t}`"))),
        }
    }
}

/// Budget and seed for randomized searches over pure states.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateSearchPolicy {
    pub seed: u64,
    /// Haar-random starting states.
    pub samples: usize,
    /// Best starting states that get locally refined.
    pub refine_starts: usize,
    /// Perturbation trials per refinement round.
    pub trials: usize,
    /// Step size at which refinement stops.
    pub min_step: f64,
    /// A sup beyond this value that still grows is flagged as infinite.
    pub ceiling: f64,
    /// Use the closed form where one is known.
    pub closed_form: bool,
}

impl Default for StateSearchPolicy {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 512,
            refine_starts: 4,
            trials: 24,
            min_step: 1e-9,
            ceiling: 1e6,
            closed_form: true,
        }
    }
}

/// Largest state-wise deviation found, with the state attaining it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub value: Bound,
    /// Largest value actually evaluated (equal to `value` when finite).
    pub evaluated: f64,
    #[serde(with = "crate::opalg::vector_serde")]
    pub state: CVector,
    /// `true` for a closed-form value, `false` for a search lower bound.
    pub exact: bool,
}

pub(crate) fn distribution_at(obs: &Observable, psi: &CVector) -> Distribution {
    let probs: Vec<f64> = obs
        .effects()
        .iter()
        .map(|e| {
            let v = e.apply(psi);
            psi.dotc(&v).re.clamp(0.0, 1.0)
        })
        .collect();
    let total: f64 = probs.iter().sum();
    let probs = probs.into_iter().map(|p| p / total).collect();
    Distribution::new(obs.outcomes().to_vec(), probs).expect("Born-rule probabilities")
}

fn normalized(v: CVector) -> CVector {
    let n = v.norm();
    v / c(n, 0.0)
}

/// Qubit data `(a, c₀, c)` when `a` is sharp with outcomes `±1` and `c` has
/// outcomes `±1`.
fn qubit_pair(a: &Observable, cobs: &Observable) -> Option<([f64; 3], f64, [f64; 3])> {
    if a.dim() != 2 || a.outcomes() != [-1.0, 1.0] || cobs.outcomes() != [-1.0, 1.0] {
        return None;
    }
    a.as_sharp()?;
    let bloch = |e: &ComplexMatrix| -> (f64, [f64; 3]) {
        let t = e.trace().re;
        let comp = [pauli::x(), pauli::y(), pauli::z()].map(|s| e.trace_product(&s).re);
        (t, comp)
    };
    let (a0, av) = bloch(&a.effects()[1]);
    if (a0 - 1.0).abs() > 1e-10 || (norm3(av) - 1.0).abs() > 1e-10 {
        return None;
    }
    let (c0, cv) = bloch(&cobs.effects()[1]);
    Some((av, c0, cv))
}

/// Worst-case state-wise Wasserstein deviation `sup_ρ Δ(A_ρ, C_ρ)`.
///
/// Qubit pairs with outcomes `±1` use the closed form
/// `Δ(A,C)² = 2|1 - c₀| + 2‖a - c‖`; everything else falls back to
/// [`w2_worst_search`], a lower bound.
pub fn w2_observables_worst(
    a: &Observable,
    cobs: &Observable,
    policy: &StateSearchPolicy,
) -> Result<WorstCase> {
    check_dims(a, cobs)?;
    if policy.closed_form {
        if let Some((av, c0, cv)) = qubit_pair(a, cobs) {
            let alpha = 1.0 - c0;
            let v = sub3(av, cv);
            let nv = norm3(v);
            let value = (2.0 * alpha.abs() + 2.0 * nv).sqrt();
            let dir = if nv > 0.0 {
                scale3(v, if alpha < 0.0 { -1.0 / nv } else { 1.0 / nv })
            } else {
                [0.0, 0.0, 1.0]
            };
            let state = DensityOperator::bloch(dir)?
                .pure_vector()
                .expect("pure Bloch state");
            return Ok(WorstCase {
                value: Bound::Finite(value),
                evaluated: value,
                state,
                exact: true,
            });
        }
    }
    w2_worst_search(a, cobs, policy)
}

fn check_dims(a: &Observable, cobs: &Observable) -> Result<()> {
    if a.dim() != cobs.dim() {
        return Err(QmuError::DimensionMismatch {
            expected: a.dim(),
            found: cobs.dim(),
        });
    }
    Ok(())
}

/// Candidate states: eigenvectors of both first moments, then Haar samples.
fn seed_states(a: &Observable, cobs: &Observable) -> Vec<CVector> {
    let mut out = Vec::new();
    for m in [a.first_moment(), cobs.first_moment()] {
        let e = eig_hermitian(&m);
        out.extend((0..m.dim()).map(|k| e.vector(k)));
    }
    out
}

/// Randomized lower bound on `sup_ρ Δ(A_ρ, C_ρ)`.
///
/// `ρ ↦ Δ(A_ρ, C_ρ)²` is convex, so the sup is attained on pure states;
/// eigenvectors and Haar samples seed a hill climb with shrinking steps.
pub fn w2_worst_search(
    a: &Observable,
    cobs: &Observable,
    policy: &StateSearchPolicy,
) -> Result<WorstCase> {
    check_dims(a, cobs)?;
    let f = |psi: &CVector| w2(&distribution_at(a, psi), &distribution_at(cobs, psi));
    let dim = a.dim();
    let mut starts = seed_states(a, cobs);
    starts.extend((0..policy.samples).map(|k| {
        let mut r = rng::stream(policy.seed, k as u64);
        random_pure_vector(dim, &mut r)
    }));
    let scored: Vec<(f64, usize)> = starts
        .par_iter()
        .enumerate()
        .map(|(k, psi)| (f(psi), k))
        .collect();
    let mut order = scored.clone();
    order.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

    let refined: Vec<(f64, CVector, bool)> = order
        .iter()
        .take(policy.refine_starts.max(1))
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(slot, &(val, k))| {
            let mut r = rng::stream(policy.seed ^ 0x005e_ed0f_c11b, slot as u64);
            hill_climb(&f, starts[k].clone(), val, policy, &mut r)
        })
        .collect();
    let (best, state, growing) = refined
        .into_iter()
        .reduce(|x, y| if y.0 > x.0 { y } else { x })
        .expect("at least one start");
    let value = if best > policy.ceiling && growing {
        Bound::Infinite
    } else {
        Bound::Finite(best)
    };
    Ok(WorstCase {
        value,
        evaluated: best,
        state,
        exact: false,
    })
}

/// Random-direction ascent on the unit sphere; returns the best value, its
/// state and whether the last round still improved.
pub(crate) fn hill_climb<R: Rng + ?Sized>(
    f: &(impl Fn(&CVector) -> f64 + Sync),
    mut psi: CVector,
    mut val: f64,
    policy: &StateSearchPolicy,
    rng: &mut R,
) -> (f64, CVector, bool) {
    let dim = psi.len();
    let mut step = 0.5;
    let mut improved = false;
    let mut rounds = 0;
    while step > policy.min_step && rounds < 4000 {
        rounds += 1;
        improved = false;
        for _ in 0..policy.trials {
            let dir = random_pure_vector(dim, rng);
            let cand = normalized(&psi + dir * c(step, 0.0));
            let v = f(&cand);
            if v > val {
                val = v;
                psi = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (val, psi, improved)
}

/// One point `(ε, Δ_ε)` of the calibration schedule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub eps: f64,
    pub value: f64,
}

/// Calibration error `Δ_c(A, C) = lim_{ε→0} Δ_ε(A, C)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `Δ_ε` over the schedule, evaluated on a fixed family of
    /// near-eigenstates, so the values are monotone in `ε`.
    pub schedule: Vec<CalibrationPoint>,
    /// The `ε → 0` limit, evaluated exactly on the eigenspaces of `A`.
    pub limit: f64,
    /// Polynomial extrapolation of the last three schedule points to `ε = 0`.
    pub extrapolated: f64,
    /// Eigenvector attaining the limit.
    #[serde(with = "crate::opalg::vector_serde")]
    pub state: CVector,
}

/// Geometric schedule `1, ½, …, 2⁻¹⁰`.
pub fn default_schedule() -> Vec<f64> {
    (0..=10).map(|k| 0.5f64.powi(k)).collect()
}

/// Calibration error of `c` against the sharp observable `a`.
pub fn calibration_error(
    a: &SharpObservable,
    cobs: &Observable,
    schedule: &[f64],
    seed: u64,
) -> Result<Calibration> {
    check_dims(a.observable(), cobs)?;
    calibration_from_moments(
        a,
        &cobs.moment_operator(1),
        &cobs.moment_operator(2),
        schedule,
        seed,
    )
}

/// Calibration error from the first two moment operators of the
/// approximator: `Δ(C_ρ, δ_y)² = ⟨C[x²]⟩ - 2y⟨C[x]⟩ + y²`.
pub fn calibration_from_moments(
    a: &SharpObservable,
    c1: &HermitianOperator,
    c2: &HermitianOperator,
    schedule: &[f64],
    seed: u64,
) -> Result<Calibration> {
    if schedule.is_empty() || schedule.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(QmuError::Numerical(
            "calibration schedule must be nonempty and positive".into(),
        ));
    }
    let dim = a.dim();
    let aop = a.operator();
    let a2 = aop.square();

    // Exact limit: on the eigenspace of a_k, the largest eigenvalue of the
    // compression of C[x²] - 2a_k C[x] + a_k².
    let mut limit = f64::NEG_INFINITY;
    let mut limit_state = None;
    let mut bases: Vec<CVector> = Vec::new();
    for (&ak, p) in a.outcomes().iter().zip(a.projections()) {
        let pe = eig_hermitian(&HermitianOperator::project(p));
        let range: Vec<CVector> = (0..dim)
            .filter(|&k| pe.values[k] > 0.5)
            .map(|k| pe.vector(k))
            .collect();
        let r = range.len();
        let mut compressed = ComplexMatrix::zeros(r).into_matrix();
        let m = &c2.matrix().clone().into_matrix() - c1.matrix().matrix() * c(2.0 * ak, 0.0)
            + ComplexMatrix::identity(dim).into_matrix() * c(ak * ak, 0.0);
        for i in 0..r {
            let mv = &m * &range[i];
            for j in 0..r {
                compressed[(j, i)] = range[j].dotc(&mv);
            }
        }
        let ce = eig_hermitian(&HermitianOperator::project(&ComplexMatrix::new(compressed)?));
        let top = ce.values[r - 1];
        let coeffs = ce.vector(r - 1);
        let mut v = CVector::zeros(dim);
        for (i, basis) in range.iter().enumerate() {
            v += basis * coeffs[i];
        }
        let v = normalized(v);
        if top > limit {
            limit = top;
            limit_state = Some(v.clone());
        }
        bases.extend(range);
        bases.push(v);
    }

    // Near-eigenstates: bases mixed with Haar states at weights ε².
    let perturbations: Vec<CVector> = (0..8)
        .map(|k| random_pure_vector(dim, &mut rng::stream(seed, k)))
        .collect();
    let moments = |psi: &CVector| -> [f64; 4] {
        [
            aop.expectation_vector(psi),
            a2.expectation_vector(psi),
            c1.expectation_vector(psi),
            c2.expectation_vector(psi),
        ]
    };
    let base_m: Vec<[f64; 4]> = bases.iter().map(moments).collect();
    let pert_m: Vec<[f64; 4]> = perturbations.iter().map(moments).collect();
    let weights: Vec<f64> = std::iter::once(0.0)
        .chain(schedule.iter().map(|e| (e * e).min(1.0)))
        .collect();

    let mut points = Vec::with_capacity(schedule.len());
    for &eps in schedule {
        let mut best = 0.0f64;
        for bm in &base_m {
            for pm in &pert_m {
                for &w in &weights {
                    let mix: Vec<f64> = (0..4).map(|i| (1.0 - w) * bm[i] + w * pm[i]).collect();
                    let var = (mix[1] - mix[0] * mix[0]).max(0.0);
                    if var > eps * eps {
                        continue;
                    }
                    let h = (eps * eps - var).sqrt();
                    for y in [mix[0] - h, mix[0] + h] {
                        let d2 = mix[3] - 2.0 * y * mix[2] + y * y;
                        best = best.max(d2);
                    }
                }
            }
        }
        points.push(CalibrationPoint {
            eps,
            value: best.max(0.0).sqrt(),
        });
    }
    Ok(Calibration {
        extrapolated: extrapolate_to_zero(&points),
        schedule: points,
        limit: limit.max(0.0).sqrt(),
        state: limit_state.expect("at least one eigenspace"),
    })
}

/// Neville's scheme at `ε = 0` through the (up to) three smallest-`ε` points.
pub fn extrapolate_to_zero(points: &[CalibrationPoint]) -> f64 {
    let mut tail: Vec<CalibrationPoint> = points.to_vec();
    tail.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    tail.truncate(3);
    let xs: Vec<f64> = tail.iter().map(|p| p.eps).collect();
    let mut p: Vec<f64> = tail.iter().map(|p| p.value).collect();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            let (xi, xj) = (xs[i], xs[i + m]);
            p[i] = (xj * p[i] - xi * p[i + 1]) / (xj - xi);
        }
    }
    p.first().copied().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{spectral_measure, BlochObservable};

    fn sharp_z() -> SharpObservable {
        spectral_measure(&pauli::hermitian([0.0, 0.0, 1.0]))
    }

    #[test]
    fn qubit_closed_form_example() {
        let a = sharp_z();
        let cobs = BlochObservable::covariant([0.0, 0.0, 0.5]).unwrap().observable();
        let wc = w2_observables_worst(a.observable(), &cobs, &StateSearchPolicy::default()).unwrap();
        assert!(wc.exact);
        assert!((wc.value.finite().unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn search_agrees_with_closed_form() {
        let a = sharp_z();
        let cobs = BlochObservable::new(0.8, [0.3, 0.1, 0.2]).unwrap().observable();
        let closed = w2_observables_worst(a.observable(), &cobs, &StateSearchPolicy::default())
            .unwrap()
            .value
            .finite()
            .unwrap();
        let policy = StateSearchPolicy {
            closed_form: false,
            ..Default::default()
        };
        let found = w2_observables_worst(a.observable(), &cobs, &policy).unwrap();
        assert!(!found.exact);
        assert!((found.evaluated - closed).abs() < 1e-6, "{} vs {closed}", found.evaluated);
    }

    #[test]
    fn same_observable_is_zero() {
        let a = sharp_z();
        let wc = w2_observables_worst(a.observable(), a.observable(), &Default::default()).unwrap();
        assert_eq!(wc.value, Bound::Finite(0.0));
    }

    #[test]
    fn calibration_covariant() {
        let g = 0.6;
        let a = sharp_z();
        let cobs = BlochObservable::covariant([0.0, 0.0, g]).unwrap().observable();
        let cal = calibration_error(&a, &cobs, &default_schedule(), 0).unwrap();
        assert!((cal.limit - (2.0 * (1.0 - g)).sqrt()).abs() < 1e-12);
        for w in cal.schedule.windows(2) {
            assert!(w[0].value >= w[1].value - 1e-15);
        }
        assert!(cal.schedule.last().unwrap().value >= cal.limit - 1e-12);
    }

    #[test]
    fn calibration_perfect() {
        let a = sharp_z();
        let cal = calibration_error(&a, a.observable(), &default_schedule(), 0).unwrap();
        assert!(cal.limit < 1e-7);
    }

    #[test]
    fn bound_json() {
        assert_eq!(serde_json::to_string(&Bound::Infinite).unwrap(), "\"+inf\"");
        assert_eq!(serde_json::to_string(&Bound::Finite(1.5)).unwrap(), "1.5");
        let b: Bound = serde_json::from_str("\"+inf\"").unwrap();
        assert!(b.is_infinite());
    }
}
