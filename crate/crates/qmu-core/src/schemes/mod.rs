//! Measurement schemes, instruments in operator-sum form and the observables
//! they induce.
//!
//! Composite spaces are ordered object first, probe second (see
//! [`crate::opalg::tensor`]).

pub mod grid;
pub mod library;

use serde::{Deserialize, Serialize};

use crate::error::{QmuError, Result};
use crate::observables::{BiprobabilityTable, Observable, SharpObservable};
use crate::opalg::{
    c, eig_hermitian, partial_trace, tensor, CVector, ComplexMatrix, DensityOperator,
    HermitianOperator, Keep, UnitaryOperator,
};
use crate::tol;

/// Probe state `σ`, coupling `U` on object ⊗ probe, pointer observable `Z`
/// and pointer function `f` (one real label per pointer outcome).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasurementScheme {
    probe_dim: usize,
    sigma: DensityOperator,
    #[serde(rename = "U")]
    coupling: UnitaryOperator,
    #[serde(rename = "Z")]
    pointer: Observable,
    pointer_map: Vec<f64>,
}

#[derive(Deserialize)]
struct SchemeRepr {
    probe_dim: usize,
    sigma: DensityOperator,
    #[serde(rename = "U")]
    coupling: UnitaryOperator,
    #[serde(rename = "Z")]
    pointer: Observable,
    pointer_map: Vec<f64>,
}

impl<'de> Deserialize<'de> for MeasurementScheme {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SchemeRepr::deserialize(d)?;
        let z = SharpObservable::new(r.pointer).map_err(serde::de::Error::custom)?;
        MeasurementScheme::new(r.probe_dim, r.sigma, r.coupling, z, r.pointer_map)
            .map_err(serde::de::Error::custom)
    }
}

impl MeasurementScheme {
    pub fn new(
        probe_dim: usize,
        sigma: DensityOperator,
        coupling: UnitaryOperator,
        pointer: SharpObservable,
        pointer_map: Vec<f64>,
    ) -> Result<Self> {
        if probe_dim == 0 || sigma.dim() != probe_dim || pointer.dim() != probe_dim {
            return Err(QmuError::InvalidScheme(format!(
                "probe dimension {probe_dim} but σ has {} and Z has {}",
                sigma.dim(),
                pointer.dim()
            )));
        }
        if !coupling.dim().is_multiple_of(probe_dim) {
            return Err(QmuError::InvalidScheme(format!(
                "coupling dimension {} is not a multiple of the probe dimension {probe_dim}",
                coupling.dim()
            )));
        }
        if pointer_map.len() != pointer.outcomes().len() {
            return Err(QmuError::InvalidScheme(format!(
                "pointer map has {} labels for {} pointer outcomes",
                pointer_map.len(),
                pointer.outcomes().len()
            )));
        }
        if pointer_map.iter().any(|x| !x.is_finite()) {
            return Err(QmuError::InvalidScheme("non-finite pointer label".into()));
        }
        Ok(Self {
            probe_dim,
            sigma,
            coupling,
            pointer: pointer.into_observable(),
            pointer_map,
        })
    }

    /// Pointer function equal to the identity on the pointer outcomes.
    pub fn with_identity_map(
        sigma: DensityOperator,
        coupling: UnitaryOperator,
        pointer: SharpObservable,
    ) -> Result<Self> {
        let map = pointer.outcomes().to_vec();
        Self::new(sigma.dim(), sigma, coupling, pointer, map)
    }

    pub fn object_dim(&self) -> usize {
        self.coupling.dim() / self.probe_dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn sigma(&self) -> &DensityOperator {
        &self.sigma
    }

    pub fn coupling(&self) -> &UnitaryOperator {
        &self.coupling
    }

    pub fn pointer(&self) -> &Observable {
        &self.pointer
    }

    pub fn pointer_map(&self) -> &[f64] {
        &self.pointer_map
    }

    fn dims(&self) -> (usize, usize) {
        (self.object_dim(), self.probe_dim)
    }

    /// Pointer projections grouped by label, labels increasing.
    fn labelled_projections(&self) -> Vec<(f64, ComplexMatrix)> {
        let pairs = self
            .pointer_map
            .iter()
            .copied()
            .zip(self.pointer.effects().iter().cloned())
            .collect();
        crate::errmetrics::distribution::merge_values(pairs, |a, b| *a = &*a + &b)
    }

    /// The labelled pointer operator `Z_f = Σ f(z) Z(z)`.
    pub fn pointer_operator(&self) -> HermitianOperator {
        let mut acc = ComplexMatrix::zeros(self.probe_dim);
        for (f, p) in self.pointer_map.iter().zip(self.pointer.effects()) {
            acc = &acc + &p.scale(*f);
        }
        HermitianOperator::project(&acc)
    }

    /// `U†(X ⊗ Y)U`.
    pub fn heisenberg(&self, object: &ComplexMatrix, probe: &ComplexMatrix) -> ComplexMatrix {
        self.coupling.conjugate(&tensor(object, probe))
    }

    /// Object operator `Y` with `tr(ρ Y) = tr((ρ⊗σ) X)` for all `ρ`.
    pub fn contract(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let id = ComplexMatrix::identity(self.object_dim());
        let weighted = x * &tensor(&id, self.sigma.matrix());
        partial_trace(&weighted, self.dims(), Keep::Object)
            .expect("dimensions fixed at construction")
            .hermitian_part()
    }

    /// `⟨X⟩` in `ρ ⊗ σ`.
    pub fn joint_expectation(&self, rho: &DensityOperator, x: &ComplexMatrix) -> Result<f64> {
        self.check_state(rho)?;
        let joint = tensor(rho.matrix(), self.sigma.matrix());
        Ok(joint.trace_product(x).re)
    }

    fn check_state(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.object_dim() {
            return Err(QmuError::DimensionMismatch {
                expected: self.object_dim(),
                found: rho.dim(),
            });
        }
        Ok(())
    }

    /// Kraus operators `√p_s (1⊗⟨t|) U (1⊗|s⟩)` for each label, with `σ = Σ p_s|s⟩⟨s|`
    /// and `|t⟩` spanning the label's pointer projection.
    fn raw_kraus(&self) -> Vec<(f64, Vec<ComplexMatrix>)> {
        let (d, p) = self.dims();
        let se = eig_hermitian(&HermitianOperator::project(self.sigma.matrix()));
        let u = self.coupling.matrix();
        self.labelled_projections()
            .into_iter()
            .map(|(label, proj)| {
                let pe = eig_hermitian(&HermitianOperator::project(&proj));
                let range: Vec<CVector> = (0..p)
                    .filter(|&k| pe.values[k] > 0.5)
                    .map(|k| pe.vector(k))
                    .collect();
                let mut ks = Vec::new();
                for s in 0..p {
                    let w = se.values[s];
                    if w <= tol::KRAUS_RANK {
                        continue;
                    }
                    let sv = se.vector(s);
                    for t in &range {
                        let mut k = ComplexMatrix::zeros(d).into_matrix();
                        for i in 0..d {
                            for j in 0..d {
                                let mut acc = c(0.0, 0.0);
                                for a in 0..p {
                                    for b in 0..p {
                                        acc += t[a].conj() * u.get(i * p + a, j * p + b) * sv[b];
                                    }
                                }
                                k[(i, j)] = acc * w.sqrt();
                            }
                        }
                        ks.push(ComplexMatrix::new(k).expect("finite"));
                    }
                }
                (label, ks)
            })
            .collect()
    }
}

/// Outcome-indexed completely positive maps in operator-sum form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instrument {
    outcomes: Vec<f64>,
    kraus: Vec<Vec<ComplexMatrix>>,
}

impl Instrument {
    /// Outcomes strictly increasing; `Σ K†K = 1`.
    pub fn new(outcomes: Vec<f64>, kraus: Vec<Vec<ComplexMatrix>>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() != kraus.len() {
            return Err(QmuError::InvalidInstrument(format!(
                "{} outcomes but {} Kraus families",
                outcomes.len(),
                kraus.len()
            )));
        }
        if outcomes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QmuError::InvalidInstrument(
                "outcomes are not strictly increasing".into(),
            ));
        }
        let dim = kraus
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| QmuError::InvalidInstrument("no Kraus operators".into()))?
            .dim();
        let mut total = ComplexMatrix::zeros(dim);
        for k in kraus.iter().flatten() {
            if k.dim() != dim {
                return Err(QmuError::DimensionMismatch {
                    expected: dim,
                    found: k.dim(),
                });
            }
            total = &total + &(&k.adjoint() * k);
        }
        let defect = (&total - &ComplexMatrix::identity(dim)).frobenius_norm();
        if defect > tol::NORMALIZATION {
            return Err(QmuError::InvalidInstrument(format!(
                "Kraus operators are not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(Self { outcomes, kraus })
    }

    pub fn dim(&self) -> usize {
        self.kraus.iter().flatten().next().expect("validated").dim()
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn kraus(&self) -> &[Vec<ComplexMatrix>] {
        &self.kraus
    }

    /// Total number of Kraus operators.
    pub fn kraus_rank(&self) -> usize {
        self.kraus.iter().map(Vec::len).sum()
    }

    /// `I(x_k)(ρ)`, unnormalized.
    pub fn apply(&self, k: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(rho.dim());
        for op in &self.kraus[k] {
            acc = &acc + &(&(op * rho) * &op.adjoint());
        }
        acc
    }

    /// The total channel `I(Ω)(ρ)`.
    pub fn channel(&self, rho: &DensityOperator) -> Result<DensityOperator> {
        self.check_state(rho)?;
        let mut acc = ComplexMatrix::zeros(rho.dim());
        for k in 0..self.outcomes.len() {
            acc = &acc + &self.apply(k, rho.matrix());
        }
        DensityOperator::new(acc.hermitian_part())
    }

    /// Heisenberg picture of a single outcome: `I(x_k)*(X) = Σ K†XK`.
    pub fn dual(&self, k: usize, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(x.dim());
        for op in &self.kraus[k] {
            acc = &acc + &(&(&op.adjoint() * x) * op);
        }
        acc
    }

    /// Heisenberg picture of the total channel.
    pub fn dual_channel(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(x.dim());
        for k in 0..self.outcomes.len() {
            acc = &acc + &self.dual(k, x);
        }
        acc
    }

    /// The observable measured by the instrument, `x ↦ I(x)*(1)`.
    pub fn observable(&self) -> Observable {
        let id = ComplexMatrix::identity(self.dim());
        let effects = (0..self.outcomes.len())
            .map(|k| self.dual(k, &id).hermitian_part())
            .collect();
        Observable::new(self.outcomes.clone(), effects).expect("validated instrument")
    }

    fn check_state(&self, rho: &DensityOperator) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(QmuError::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        Ok(())
    }
}

/// Canonical Kraus family of the map `X ↦ Σ_i K_i X K_i†`: eigenvectors of its
/// Choi matrix, dropping eigenvalues below the Kraus-rank threshold.
pub fn canonical_kraus(kraus: &[ComplexMatrix]) -> Vec<ComplexMatrix> {
    let Some(first) = kraus.first() else {
        return Vec::new();
    };
    let d = first.dim();
    // vec(K) column-stacked into a d² vector; Choi = Σ vec(K) vec(K)†.
    let mut choi = ComplexMatrix::zeros(d * d).into_matrix();
    for k in kraus {
        let v = CVector::from_iterator(
            d * d,
            (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| k.get(i, j)),
        );
        choi += &v * v.adjoint();
    }
    let choi = HermitianOperator::project(&ComplexMatrix::new(choi).expect("finite"));
    let eig = eig_hermitian(&choi);
    let mut out = Vec::new();
    for idx in (0..d * d).rev() {
        let lam = eig.values[idx];
        if lam < tol::KRAUS_RANK {
            continue;
        }
        let v = eig.vector(idx);
        let mut m = ComplexMatrix::zeros(d).into_matrix();
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = v[i * d + j] * lam.sqrt();
            }
        }
        out.push(ComplexMatrix::new(m).expect("finite"));
    }
    out
}

/// Observable `F` of the scheme: `tr(ρF(y)) = tr((ρ⊗σ) U†(1⊗Z(f⁻¹(y)))U)`.
pub fn induced_observable(m: &MeasurementScheme) -> Observable {
    let id = ComplexMatrix::identity(m.object_dim());
    let pairs = m
        .labelled_projections()
        .into_iter()
        .map(|(label, proj)| (label, m.contract(&m.heisenberg(&id, &proj))))
        .collect();
    Observable::from_pairs(pairs).expect("scheme induces a POVM")
}

/// Instrument of the scheme:
/// `tr(I(y)(ρ) B) = tr((ρ⊗σ) U†(B ⊗ Z(f⁻¹(y)))U)`.
pub fn induced_instrument(m: &MeasurementScheme) -> Instrument {
    let (outcomes, kraus): (Vec<f64>, Vec<Vec<ComplexMatrix>>) = m
        .raw_kraus()
        .into_iter()
        .map(|(label, ks)| (label, canonical_kraus(&ks)))
        .unzip();
    Instrument::new(outcomes, kraus).expect("scheme induces an instrument")
}

/// `B'(y) = I(Ω)*(B(y))`.
pub fn distorted_observable(i: &Instrument, b: &Observable) -> Result<Observable> {
    if i.dim() != b.dim() {
        return Err(QmuError::DimensionMismatch {
            expected: i.dim(),
            found: b.dim(),
        });
    }
    let effects = b
        .effects()
        .iter()
        .map(|e| i.dual_channel(e).hermitian_part())
        .collect();
    Observable::new(b.outcomes().to_vec(), effects)
}

/// Instrument with constant channel: `I(x)(ρ) = tr(ρF(x)) ρ₀`.
pub fn constant_channel_instrument(f: &Observable, rho0: &DensityOperator) -> Result<Instrument> {
    if f.dim() != rho0.dim() {
        return Err(QmuError::DimensionMismatch {
            expected: f.dim(),
            found: rho0.dim(),
        });
    }
    let d = f.dim();
    let re = eig_hermitian(&HermitianOperator::project(rho0.matrix()));
    let kraus = f
        .effects()
        .iter()
        .map(|e| {
            let fe = eig_hermitian(&HermitianOperator::project(e));
            let mut ks = Vec::new();
            for i in 0..d {
                for j in 0..d {
                    let w = re.values[i] * fe.values[j];
                    if w <= tol::KRAUS_RANK {
                        continue;
                    }
                    let k = ComplexMatrix::outer(&re.vector(i), &fe.vector(j)).scale(w.sqrt());
                    ks.push(k);
                }
            }
            ks
        })
        .collect();
    Instrument::new(f.outcomes().to_vec(), kraus)
}

/// Lüders instrument of a sharp observable: Kraus operators are the
/// spectral projections.
pub fn lueders_instrument(a: &SharpObservable) -> Instrument {
    Instrument::new(
        a.outcomes().to_vec(),
        a.projections().iter().map(|p| vec![p.clone()]).collect(),
    )
    .expect("projections sum to the identity")
}

/// Identity instrument with a single outcome `0`.
pub fn identity_instrument(dim: usize) -> Instrument {
    Instrument::new(vec![0.0], vec![vec![ComplexMatrix::identity(dim)]]).expect("identity")
}

/// Sequential biobservable `E(x, y) = I(x)*(G(y))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointObservable {
    pub row_outcomes: Vec<f64>,
    pub col_outcomes: Vec<f64>,
    /// `effects[j][k] = E(x_j, y_k)`.
    pub effects: Vec<Vec<ComplexMatrix>>,
}

impl JointObservable {
    pub fn first_marginal(&self) -> Observable {
        let effects = self
            .effects
            .iter()
            .map(|row| {
                row.iter()
                    .fold(ComplexMatrix::zeros(row[0].dim()), |acc, e| &acc + e)
            })
            .collect();
        Observable::new(self.row_outcomes.clone(), effects).expect("marginal of a biobservable")
    }

    pub fn second_marginal(&self) -> Observable {
        let d = self.effects[0][0].dim();
        let effects = (0..self.col_outcomes.len())
            .map(|k| {
                self.effects
                    .iter()
                    .fold(ComplexMatrix::zeros(d), |acc, row| &acc + &row[k])
            })
            .collect();
        Observable::new(self.col_outcomes.clone(), effects).expect("marginal of a biobservable")
    }

    /// Biprobabilities `tr(ρ E(x, y))`.
    pub fn table(&self, rho: &DensityOperator) -> BiprobabilityTable {
        BiprobabilityTable {
            row_outcomes: self.row_outcomes.clone(),
            col_outcomes: self.col_outcomes.clone(),
            entries: self
                .effects
                .iter()
                .map(|row| row.iter().map(|e| rho.matrix().trace_product(e).re).collect())
                .collect(),
            jointly_measurable: true,
        }
    }

    /// Largest deviation `‖E(x,y) - E₁(x)E₂(y)‖` over all pairs.
    pub fn product_form_defect(&self) -> f64 {
        let e1 = self.first_marginal();
        let e2 = self.second_marginal();
        let mut worst = 0.0f64;
        for (j, row) in self.effects.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                let prod = &e1.effects()[j] * &e2.effects()[k];
                worst = worst.max((e - &prod).frobenius_norm());
            }
        }
        worst
    }
}

pub fn sequential_biobservable(i: &Instrument, g: &Observable) -> Result<JointObservable> {
    if i.dim() != g.dim() {
        return Err(QmuError::DimensionMismatch {
            expected: i.dim(),
            found: g.dim(),
        });
    }
    let effects = (0..i.outcomes().len())
        .map(|k| {
            g.effects()
                .iter()
                .map(|e| i.dual(k, e).hermitian_part())
                .collect()
        })
        .collect();
    Ok(JointObservable {
        row_outcomes: i.outcomes().to_vec(),
        col_outcomes: g.outcomes().to_vec(),
        effects,
    })
}

/// Sequence Lüders `B` → total channel of `i` → `B`, compared value by
/// value: `Σ (b - y)² tr(ρ B(b) I(Ω)*(B(y)) B(b))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeStepComparison {
    pub value: f64,
    /// `[B, B'(y)] = 0` for every `y`; then the value equals `η_NO`.
    pub commuting: bool,
}

pub fn three_step_comparison(
    b: &SharpObservable,
    i: &Instrument,
    rho: &DensityOperator,
) -> Result<ThreeStepComparison> {
    let distorted = distorted_observable(i, b.observable())?;
    let lueders = lueders_instrument(b);
    let mut acc = 0.0;
    for (jb, &xb) in b.outcomes().iter().enumerate() {
        let post = lueders.apply(jb, rho.matrix());
        for (y, e) in distorted.iter() {
            acc += (xb - y).powi(2) * post.trace_product(e).re;
        }
    }
    Ok(ThreeStepComparison {
        value: acc.max(0.0).sqrt(),
        commuting: b.observable().commutes_with(&distorted),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::spectral_measure;
    use crate::opalg::{pauli, random_density, random_hermitian, random_unitary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sz() -> SharpObservable {
        spectral_measure(&pauli::hermitian([0.0, 0.0, 1.0]))
    }

    fn sx() -> SharpObservable {
        spectral_measure(&pauli::hermitian([1.0, 0.0, 0.0]))
    }

    #[test]
    fn instrument_scheme_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = random_unitary(6, &mut rng);
            let sigma = random_density(3, &mut rng);
            let z = spectral_measure(&random_hermitian(3, &mut rng));
            let m = MeasurementScheme::with_identity_map(sigma, u, z.clone()).unwrap();
            let inst = induced_instrument(&m);
            let obs = induced_observable(&m);
            assert!(inst.observable().effects().iter().zip(obs.effects()).all(|(a, b)| a.is_close(b, 1e-10)));
            let rho = random_density(2, &mut rng);
            let b = random_hermitian(2, &mut rng);
            for (k, (label, proj)) in m.labelled_projections().into_iter().enumerate() {
                assert_eq!(label, inst.outcomes()[k]);
                let lhs = inst.apply(k, rho.matrix()).trace_product(b.matrix()).re;
                let rhs = m.joint_expectation(&rho, &m.heisenberg(b.matrix(), &proj)).unwrap();
                assert!((lhs - rhs).abs() < 1e-9);
            }
            let out = inst.channel(&rho).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn canonical_kraus_preserves_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng);
        let sigma = random_density(2, &mut rng);
        let m = MeasurementScheme::with_identity_map(sigma, u, sz()).unwrap();
        let raw = m.raw_kraus();
        let inst = induced_instrument(&m);
        let rho = random_density(2, &mut rng);
        for (k, (_, ks)) in raw.iter().enumerate() {
            let mut direct = ComplexMatrix::zeros(2);
            for op in ks {
                direct = &direct + &(&(op * rho.matrix()) * &op.adjoint());
            }
            assert!(direct.is_close(&inst.apply(k, rho.matrix()), 1e-10));
            assert!(inst.kraus()[k].len() <= 4);
        }
    }

    #[test]
    fn lueders_distorts_sigma1_to_zero() {
        let inst = lueders_instrument(&sz());
        let b = distorted_observable(&inst, sx().observable()).unwrap();
        // oracle: ½(P₊σ₁P₊ + P₋σ₁P₋) summed with weights ±1
        let m1 = b.first_moment();
        assert!(m1.matrix().frobenius_norm() < 1e-14);
        for e in b.effects() {
            assert!(e.is_close(&ComplexMatrix::identity(2).scale(0.5), 1e-14));
        }
    }

    #[test]
    fn identity_instrument_keeps_observable() {
        let b = sx().into_observable();
        assert_eq!(distorted_observable(&identity_instrument(2), &b).unwrap(), b);
    }

    #[test]
    fn constant_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = sx().into_observable();
        let rho0 = random_density(2, &mut rng);
        let inst = constant_channel_instrument(&f, &rho0).unwrap();
        let rho = random_density(2, &mut rng);
        for k in 0..2 {
            let p = rho.matrix().trace_product(&f.effects()[k]).re;
            assert!(inst.apply(k, rho.matrix()).is_close(&rho0.matrix().scale(p), 1e-12));
        }
        let b = sz().into_observable();
        let bd = distorted_observable(&inst, &b).unwrap();
        for (e, orig) in bd.effects().iter().zip(b.effects()) {
            let w = rho0.matrix().trace_product(orig).re;
            assert!(e.is_close(&ComplexMatrix::identity(2).scale(w), 1e-12));
        }
    }

    #[test]
    fn lueders_sequential_is_diagonal() {
        let a = sz();
        let j = sequential_biobservable(&lueders_instrument(&a), a.observable()).unwrap();
        let rho = DensityOperator::bloch([0.3, 0.2, 0.4]).unwrap();
        let t = j.table(&rho);
        assert!(t.entries[0][1].abs() < 1e-15 && t.entries[1][0].abs() < 1e-15);
        assert!((t.entries[1][1] - 0.7).abs() < 1e-14);
        assert!(j.product_form_defect() < 1e-12);
    }

    #[test]
    fn product_form_for_sharp_first_marginal() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = spectral_measure(&random_hermitian(3, &mut rng));
        let g = spectral_measure(&random_hermitian(3, &mut rng)).into_observable();
        let j = sequential_biobservable(&lueders_instrument(&a), &g).unwrap();
        assert!(j.product_form_defect() < 1e-9);
        assert!(j.second_marginal().effects().iter().all(|e| e.hermiticity_defect() < 1e-12));
    }

    #[test]
    fn scheme_json_roundtrip() {
        let m = library::swap_scheme(&sz(), &DensityOperator::bloch([0.0, 0.0, 0.5]).unwrap())
            .unwrap();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.starts_with("{\"probe_dim\":2,\"sigma\":"));
        let back: MeasurementScheme = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn dimension_errors() {
        let sigma = DensityOperator::maximally_mixed(3);
        let r = MeasurementScheme::with_identity_map(sigma, UnitaryOperator::identity(4), sz());
        assert!(matches!(r, Err(QmuError::InvalidScheme(_))));
    }
}
