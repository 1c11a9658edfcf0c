//! Standard finite measurement schemes.

use rand::Rng;

use super::MeasurementScheme;
use crate::error::Result;
use crate::observables::{spectral_measure, SharpObservable};
use crate::opalg::{
    random_density, random_hermitian, random_unitary, tensor, ComplexMatrix, DensityOperator,
    HermitianOperator, UnitaryOperator,
};

/// `U = 1`, pointer `A` on a probe copy of the object space, probe state `σ`.
/// Measures the trivial observable `A_σ(·)·1` and leaves the object alone.
pub fn identity_scheme(a: &SharpObservable, sigma: &DensityOperator) -> Result<MeasurementScheme> {
    let d = a.dim();
    MeasurementScheme::with_identity_map(
        sigma.clone(),
        UnitaryOperator::identity(d * d),
        a.clone(),
    )
}

/// `U` swaps object and probe; the pointer `A` then reads the object's
/// input, so the measured observable is `A` itself and the object leaves in
/// state `σ`.
pub fn swap_scheme(a: &SharpObservable, sigma: &DensityOperator) -> Result<MeasurementScheme> {
    MeasurementScheme::with_identity_map(sigma.clone(), UnitaryOperator::swap(a.dim()), a.clone())
}

/// Premeasurement `U = Σ_k A(a_k) ⊗ S^k` with a cyclic shift `S` on an
/// `n`-level probe prepared in `|0⟩`; pointer `|k⟩ ↦ a_k`. Its instrument is
/// the Lüders instrument of `A`.
pub fn lueders_scheme(a: &SharpObservable) -> Result<MeasurementScheme> {
    let n = a.outcomes().len();
    let mut shift = ComplexMatrix::zeros(n).into_matrix();
    for j in 0..n {
        shift[((j + 1) % n, j)] = num_complex::Complex64::new(1.0, 0.0);
    }
    let shift = ComplexMatrix::new(shift)?;
    let d = a.dim();
    let mut u = ComplexMatrix::zeros(d * n);
    let mut power = ComplexMatrix::identity(n);
    for p in a.projections() {
        u = &u + &tensor(p, &power);
        power = &shift * &power;
    }
    let u = UnitaryOperator::new(u)?;
    let levels: Vec<f64> = (0..n).map(|k| k as f64).collect();
    let pointer = spectral_measure(&HermitianOperator::from_real_diagonal(&levels));
    let mut ground = vec![0.0; n];
    ground[0] = 1.0;
    let sigma = DensityOperator::new(ComplexMatrix::diagonal(&ground))?;
    MeasurementScheme::new(n, sigma, u, pointer, a.outcomes().to_vec())
}

/// Random qubit scheme: probe of dimension 2 or 3, Ginibre probe state, Haar
/// coupling and a random sharp pointer labelled by its eigenvalues.
pub fn random_qubit_scheme<R: Rng + ?Sized>(rng: &mut R) -> MeasurementScheme {
    let p = rng.gen_range(2..=3);
    let sigma = random_density(p, rng);
    let u = random_unitary(2 * p, rng);
    let z = spectral_measure(&random_hermitian(p, rng));
    MeasurementScheme::with_identity_map(sigma, u, z).expect("consistent dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opalg::pauli;
    use crate::schemes::{induced_instrument, induced_observable, lueders_instrument};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sz() -> SharpObservable {
        spectral_measure(&pauli::hermitian([0.0, 0.0, 1.0]))
    }

    #[test]
    fn identity_scheme_is_trivial() {
        let sigma = DensityOperator::bloch([0.0, 0.0, 0.6]).unwrap();
        let f = induced_observable(&identity_scheme(&sz(), &sigma).unwrap());
        // A_σ: P(+1) = 0.8, P(-1) = 0.2
        assert!(f.effects()[0].is_close(&ComplexMatrix::identity(2).scale(0.2), 1e-12));
        assert!(f.effects()[1].is_close(&ComplexMatrix::identity(2).scale(0.8), 1e-12));
    }

    #[test]
    fn identity_scheme_channel_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = random_density(2, &mut rng);
        let inst = induced_instrument(&identity_scheme(&sz(), &sigma).unwrap());
        let rho = random_density(2, &mut rng);
        assert!(inst.channel(&rho).unwrap().matrix().is_close(rho.matrix(), 1e-10));
    }

    #[test]
    fn swap_scheme_measures_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let sigma = random_density(2, &mut rng);
        let m = swap_scheme(&sz(), &sigma).unwrap();
        assert_eq!(induced_observable(&m).outcomes(), sz().outcomes());
        for (e, p) in induced_observable(&m).effects().iter().zip(sz().projections()) {
            assert!(e.is_close(p, 1e-12));
        }
        let rho = random_density(2, &mut rng);
        let out = induced_instrument(&m).channel(&rho).unwrap();
        assert!(out.matrix().is_close(sigma.matrix(), 1e-10));
    }

    #[test]
    fn lueders_scheme_instrument() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = spectral_measure(&random_hermitian(3, &mut rng));
        let m = lueders_scheme(&a).unwrap();
        let f = induced_observable(&m);
        for (e, p) in f.effects().iter().zip(a.projections()) {
            assert!(e.is_close(p, 1e-10));
        }
        let inst = induced_instrument(&m);
        let target = lueders_instrument(&a);
        let rho = random_density(3, &mut rng);
        for k in 0..3 {
            assert!(inst.apply(k, rho.matrix()).is_close(&target.apply(k, rho.matrix()), 1e-10));
        }
    }
}
