//! Observables with finitely many real outcomes (POVMs), their moment
//! operators, intrinsic noise and smearings.

use serde::{Deserialize, Serialize};

use crate::errmetrics::distribution::{merge_values, Coupling, Distribution};
use crate::error::{QmuError, Result};
use crate::opalg::{
    eig_hermitian, norm3, pauli, ComplexMatrix, DensityOperator, HermitianOperator,
};
use crate::tol;

/// Normalized positive operator measure on a finite subset of the reals.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observable {
    outcomes: Vec<f64>,
    effects: Vec<ComplexMatrix>,
}

#[derive(Deserialize)]
struct ObservableRepr {
    outcomes: Vec<f64>,
    effects: Vec<ComplexMatrix>,
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ObservableRepr::deserialize(d)?;
        Observable::new(r.outcomes, r.effects).map_err(serde::de::Error::custom)
    }
}

impl Observable {
    /// Outcomes strictly increasing; effects Hermitian with spectrum in
    /// `[0, 1]` and summing to the identity.
    pub fn new(outcomes: Vec<f64>, effects: Vec<ComplexMatrix>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != effects.len() {
            return Err(QmuError::InvalidObservable(format!(
                "{} outcomes but {} effects",
                outcomes.len(),
                effects.len()
            )));
        }
        if outcomes.iter().any(|x| !x.is_finite()) {
            return Err(QmuError::InvalidObservable("non-finite outcome".into()));
        }
        if outcomes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QmuError::InvalidObservable(
                "outcomes are not strictly increasing".into(),
            ));
        }
        let dim = effects[0].dim();
        let mut total = ComplexMatrix::zeros(dim);
        let mut checked = Vec::with_capacity(effects.len());
        for (x, e) in outcomes.iter().zip(effects) {
            if e.dim() != dim {
                return Err(QmuError::DimensionMismatch {
                    expected: dim,
                    found: e.dim(),
                });
            }
            let h = HermitianOperator::new(e)?;
            let spec = eig_hermitian(&h).values;
            let (lo, hi) = (spec[0], spec[spec.len() - 1]);
            if lo < -tol::EFFECT || hi > 1.0 + tol::EFFECT {
                return Err(QmuError::InvalidObservable(format!(
                    "effect for outcome {x} has spectrum [{lo:.3e}, {hi:.6}]"
                )));
            }
            total = &total + h.matrix();
            checked.push(h.matrix().clone());
        }
        let defect = (&total - &ComplexMatrix::identity(dim)).frobenius_norm();
        if defect > tol::NORMALIZATION {
            return Err(QmuError::InvalidObservable(format!(
                "effects sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Self {
            outcomes,
            effects: checked,
        })
    }

    /// From unsorted `(outcome, effect)` pairs; effects of coincident outcomes
    /// are summed.
    pub fn from_pairs(pairs: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        let merged = merge_values(pairs, |a, b| *a = &*a + &b);
        let (outcomes, effects) = merged.into_iter().unzip();
        Self::new(outcomes, effects)
    }

    /// Trivial observable `F(x) = p(x)·1`.
    pub fn trivial(dist: &Distribution, dim: usize) -> Self {
        let id = ComplexMatrix::identity(dim);
        Self {
            outcomes: dist.support().to_vec(),
            effects: dist.probabilities().iter().map(|&p| id.scale(p)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.effects[0].dim()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[ComplexMatrix] {
        &self.effects
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ComplexMatrix)> {
        self.outcomes.iter().copied().zip(self.effects.iter())
    }

    /// `F[xⁿ] = Σ_k x_kⁿ F(x_k)`.
    pub fn moment_operator(&self, n: u32) -> HermitianOperator {
        let mut acc = ComplexMatrix::zeros(self.dim());
        for (x, e) in self.iter() {
            acc = &acc + &e.scale(x.powi(n as i32));
        }
        HermitianOperator::project(&acc)
    }

    pub fn first_moment(&self) -> HermitianOperator {
        self.moment_operator(1)
    }

    /// Intrinsic noise `V(F) = F[x²] - F[x]²`.
    pub fn intrinsic_noise(&self) -> HermitianOperator {
        let m1 = self.first_moment();
        self.moment_operator(2).sub(&m1.square())
    }

    /// Born-rule distribution `x_k ↦ tr(ρ F(x_k))`.
    pub fn distribution_of(&self, rho: &DensityOperator) -> Result<Distribution> {
        if rho.dim() != self.dim() {
            return Err(QmuError::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let mut probs = Vec::with_capacity(self.len());
        for e in &self.effects {
            let p = rho.matrix().trace_product(e).re;
            if p < -tol::DENSITY {
                return Err(QmuError::Numerical(format!("negative probability {p:.3e}")));
            }
            probs.push(p.clamp(0.0, 1.0));
        }
        Distribution::new(self.outcomes.clone(), probs)
    }

    /// Every effect is a projection and distinct effects are orthogonal.
    pub fn is_sharp(&self) -> bool {
        for (i, e) in self.effects.iter().enumerate() {
            if !(e * e).is_close(e, tol::PROJECTION) {
                return false;
            }
            for f in &self.effects[i + 1..] {
                if (e * f).frobenius_norm() > tol::PROJECTION {
                    return false;
                }
            }
        }
        true
    }

    /// Every pair of effects of `self` and `other` commutes.
    pub fn commutes_with(&self, other: &Observable) -> bool {
        self.dim() == other.dim()
            && self.effects.iter().all(|e| {
                other
                    .effects
                    .iter()
                    .all(|f| e.commutator(f).frobenius_norm() <= tol::COMMUTATOR)
            })
    }

    /// Convolution `μ * F`: the effect at `z` is `Σ_{x+y=z} μ(y) F(x)`.
    pub fn smear(&self, mu: &Distribution) -> Observable {
        let pairs = self
            .iter()
            .flat_map(|(x, e)| mu.iter().map(move |(y, p)| (x + y, e.scale(p))))
            .collect();
        Observable::from_pairs(pairs).expect("smearing preserves validity")
    }

    /// Relabels outcomes through `f`, merging outcomes mapped to the same value.
    pub fn relabel(&self, f: impl Fn(f64) -> f64) -> Result<Observable> {
        let pairs = self.iter().map(|(x, e)| (f(x), e.clone())).collect();
        Observable::from_pairs(pairs)
    }

    /// Drops outcomes whose effect is zero.
    pub fn trimmed(&self) -> Observable {
        let pairs: Vec<(f64, ComplexMatrix)> = self
            .iter()
            .filter(|(_, e)| e.frobenius_norm() > tol::NORMALIZATION)
            .map(|(x, e)| (x, e.clone()))
            .collect();
        if pairs.is_empty() {
            return self.clone();
        }
        let (outcomes, effects) = pairs.into_iter().unzip();
        Observable { outcomes, effects }
    }

    /// Wraps as a sharp observable if it is one.
    pub fn as_sharp(&self) -> Option<SharpObservable> {
        let t = self.trimmed();
        t.is_sharp().then_some(SharpObservable(t))
    }
}

/// Projection-valued observable.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpObservable(Observable);

impl SharpObservable {
    pub fn new(obs: Observable) -> Result<Self> {
        let t = obs.trimmed();
        if !t.is_sharp() {
            return Err(QmuError::InvalidObservable(
                "effects are not mutually orthogonal projections".into(),
            ));
        }
        Ok(Self(t))
    }

    pub fn observable(&self) -> &Observable {
        &self.0
    }

    pub fn into_observable(self) -> Observable {
        self.0
    }

    /// The self-adjoint operator `A = Σ x A(x)`.
    pub fn operator(&self) -> HermitianOperator {
        self.0.first_moment()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn outcomes(&self) -> &[f64] {
        self.0.outcomes()
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        self.0.effects()
    }
}

/// Spectral measure of a Hermitian operator. Eigenvalues within the outcome
/// merge tolerance form one outcome whose effect is the eigenprojection.
pub fn spectral_measure(op: &HermitianOperator) -> SharpObservable {
    let eig = eig_hermitian(op);
    let pairs: Vec<(f64, ComplexMatrix)> = eig
        .values
        .iter()
        .enumerate()
        .map(|(k, &lam)| {
            let v = eig.vector(k);
            (lam, ComplexMatrix::outer(&v, &v))
        })
        .collect();
    let merged = merge_values(pairs, |a, b| *a = &*a + &b);
    let (outcomes, effects): (Vec<f64>, Vec<ComplexMatrix>) = merged
        .into_iter()
        .map(|(x, e)| (x, e.hermitian_part()))
        .unzip();
    SharpObservable(Observable { outcomes, effects })
}

/// Two-outcome qubit observable `±1 ↦ C_±`, `C_+ = ½(c₀·1 + c·σ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochObservable {
    pub c0: f64,
    pub c: [f64; 3],
}

impl BlochObservable {
    /// Requires `‖c‖ ≤ min(c₀, 2 - c₀)`.
    pub fn new(c0: f64, c: [f64; 3]) -> Result<Self> {
        let n = norm3(c);
        let cap = c0.min(2.0 - c0);
        if n.is_nan() || n > cap + tol::EFFECT {
            return Err(QmuError::InvalidObservable(format!(
                "Bloch observable with |c| = {n} exceeds min(c0, 2-c0) = {cap}"
            )));
        }
        Ok(Self { c0, c })
    }

    /// Covariant (`c₀ = 1`) observable.
    pub fn covariant(c: [f64; 3]) -> Result<Self> {
        Self::new(1.0, c)
    }

    /// Sharp `a·σ` for a unit vector `a`.
    pub fn sharp(a: [f64; 3]) -> Result<Self> {
        let n = norm3(a);
        if (n - 1.0).abs() > 1e-12 {
            return Err(QmuError::InvalidObservable(format!(
                "sharp qubit observable needs a unit vector, got |a| = {n}"
            )));
        }
        Self::new(1.0, a)
    }

    pub fn plus_effect(&self) -> ComplexMatrix {
        (&ComplexMatrix::identity(2).scale(self.c0) + &pauli::dot(self.c)).scale(0.5)
    }

    /// Outcomes `±1`.
    pub fn observable(&self) -> Observable {
        self.observable_scaled(1.0)
    }

    /// Outcomes `±scale` with the same effects.
    pub fn observable_scaled(&self, scale: f64) -> Observable {
        let plus = self.plus_effect();
        let minus = &ComplexMatrix::identity(2) - &plus;
        Observable {
            outcomes: vec![-scale, scale],
            effects: vec![minus.hermitian_part(), plus.hermitian_part()],
        }
    }
}

/// Three-outcome qubit observable whose intrinsic noise vanishes on a state
/// where its distribution still differs from that of its first moment.
///
/// Outcomes and effects, with `γ = 2 - √2`:
/// `+1 ↦ γ½(1 + σ₁)`, `-1 ↦ γ½(1 + σ₂)`, `0 ↦ 2(1-γ)½(1 - (σ₁+σ₂)/√2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitTriple {
    pub gamma: f64,
}

impl Default for QubitTriple {
    fn default() -> Self {
        Self {
            gamma: 2.0 - std::f64::consts::SQRT_2,
        }
    }
}

impl QubitTriple {
    pub fn effects(&self) -> [ComplexMatrix; 3] {
        let g = self.gamma;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let id = ComplexMatrix::identity(2);
        let c1 = (&id + &pauli::x()).scale(0.5 * g);
        let c2 = (&id + &pauli::y()).scale(0.5 * g);
        let c3 = (&id - &pauli::dot([s, s, 0.0])).scale(1.0 - g);
        [c1, c2, c3]
    }

    pub fn observable(&self) -> Observable {
        let [c1, c2, c3] = self.effects();
        Observable::new(vec![-1.0, 0.0, 1.0], vec![c2, c3, c1])
            .expect("triple effects form a POVM")
    }

    /// `C[x] = ½γ(σ₁ - σ₂)`.
    pub fn first_moment(&self) -> HermitianOperator {
        pauli::hermitian([0.5 * self.gamma, -0.5 * self.gamma, 0.0])
    }

    /// `ρ₀ = ½(1 - (σ₁+σ₂)/√2)`, the kernel of the intrinsic noise.
    pub fn null_noise_state(&self) -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityOperator::bloch([-s, -s, 0.0]).expect("pure qubit state")
    }
}

/// Table of `Re tr(ρ A(x_j) C(y_k))` (or of genuine joint probabilities).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiprobabilityTable {
    pub row_outcomes: Vec<f64>,
    pub col_outcomes: Vec<f64>,
    /// `entries[j][k]` belongs to `(row_outcomes[j], col_outcomes[k])`.
    pub entries: Vec<Vec<f64>>,
    /// All pairs of effects commute, so the entries are joint probabilities.
    pub jointly_measurable: bool,
}

impl BiprobabilityTable {
    /// Sums over columns, indexed by the row outcomes.
    pub fn row_marginal(&self) -> Vec<f64> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    /// Sums over rows, indexed by the column outcomes.
    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.col_outcomes.len())
            .map(|k| self.entries.iter().map(|r| r[k]).sum())
            .collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.entries
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `Σ (x - y)² entry(x, y)`.
    pub fn squared_value_deviation(&self) -> f64 {
        let mut acc = 0.0;
        for (j, row) in self.entries.iter().enumerate() {
            for (k, w) in row.iter().enumerate() {
                let d = self.row_outcomes[j] - self.col_outcomes[k];
                acc += d * d * w;
            }
        }
        acc
    }

    /// The table as a coupling of its marginals, when entries are nonnegative.
    pub fn as_coupling(&self) -> Option<Coupling> {
        if self.min_entry() < -tol::COMMUTATOR {
            return None;
        }
        let weights = self
            .entries
            .iter()
            .map(|r| r.iter().map(|w| w.max(0.0)).collect())
            .collect();
        Coupling::new(self.row_outcomes.clone(), self.col_outcomes.clone(), weights).ok()
    }
}

/// `(x_j, y_k) ↦ Re tr(ρ A(x_j) C(y_k))`.
///
/// When `A` and `C` do not commute the table may have negative entries; it
/// is returned with `jointly_measurable = false` rather than rejected.
pub fn product_biobservable(
    a: &SharpObservable,
    c: &Observable,
    rho: &DensityOperator,
) -> Result<BiprobabilityTable> {
    if a.dim() != c.dim() {
        return Err(QmuError::DimensionMismatch {
            expected: a.dim(),
            found: c.dim(),
        });
    }
    if rho.dim() != a.dim() {
        return Err(QmuError::DimensionMismatch {
            expected: a.dim(),
            found: rho.dim(),
        });
    }
    let entries = a
        .projections()
        .iter()
        .map(|p| {
            let rp = rho.matrix() * p;
            c.effects()
                .iter()
                .map(|e| rp.trace_product(e).re)
                .collect()
        })
        .collect();
    Ok(BiprobabilityTable {
        row_outcomes: a.outcomes().to_vec(),
        col_outcomes: c.outcomes().to_vec(),
        entries,
        jointly_measurable: a.observable().commutes_with(c),
    })
}
