//! Dense complex operator algebra on finite-dimensional Hilbert spaces.
//!
//! Matrices are stored densely (`nalgebra::DMatrix<Complex64>`). The validated
//! wrappers [`HermitianOperator`], [`DensityOperator`] and [`UnitaryOperator`]
//! check their defining property once at construction; afterwards they are
//! immutable values.
//!
//! Tensor products use the object-major ordering: for `a ⊗ b` the combined
//! index of `(i_a, i_b)` is `i_a * dim(b) + i_b`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{QmuError, Result};
use crate::tol;

pub type CVector = DVector<Complex64>;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Serde for [`CVector`] as a list of `[re, im]` pairs:
/// `#[serde(with = "crate::opalg::vector_serde")]`.
pub mod vector_serde {
    use super::{c, CVector};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &CVector, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| [z.re, z.im])
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CVector, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(d)?;
        Ok(CVector::from_iterator(
            pairs.len(),
            pairs.into_iter().map(|[a, b]| c(a, b)),
        ))
    }
}

/// Square complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.0)
    }
}

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(QmuError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(QmuError::NotSquare { rows: 0, cols: 0 });
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(QmuError::NonFinite);
        }
        Ok(Self(m))
    }

    /// Row-major nested rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
            return Err(QmuError::NotSquare { rows: n, cols });
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| re(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                re(values[i])
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Rank-one `|u><v|`.
    pub fn outer(u: &CVector, v: &CVector) -> Self {
        Self(u * v.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * re(s))
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self(&self.0 * s)
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.0 * v
    }

    /// `A B - B A`.
    pub fn commutator(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Largest absolute deviation from Hermiticity over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.0[(i, j)] - self.0[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `(A + A^†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * re(0.5))
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.0[(i, k)] * other.0[(k, i)];
            }
        }
        acc
    }

    pub fn is_close(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim() && (&self.0 - &other.0).norm() <= tol
    }

    /// Row-major nested `[re, im]` pairs.
    pub fn to_rows(&self) -> Vec<Vec<[f64; 2]>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| [self.0[(i, j)].re, self.0[(i, j)].im]).collect())
            .collect()
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(|[a, b]| c(a, b)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

/// Self-adjoint operator.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let deviation = m.hermiticity_defect();
        if deviation > tol::HERMITIAN {
            return Err(QmuError::NotHermitian { deviation });
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Hermitian part of an operator that is self-adjoint in exact arithmetic
    /// (products like `U^† Z U`); rounding residue is discarded.
    pub fn project(m: &ComplexMatrix) -> Self {
        Self(m.hermitian_part())
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        Self(ComplexMatrix::diagonal(values))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// `tr(ρ A)`, real for Hermitian `A`.
    pub fn expectation(&self, rho: &DensityOperator) -> f64 {
        rho.matrix().trace_product(&self.0).re
    }

    /// `<ψ|A|ψ>` for a vector state.
    pub fn expectation_vector(&self, psi: &CVector) -> f64 {
        psi.dotc(&self.0.apply(psi)).re
    }

    /// Variance `<A^2> - <A>^2` of the spectral measure of `A` in `ρ`.
    pub fn variance(&self, rho: &DensityOperator) -> f64 {
        let mean = self.expectation(rho);
        let sq = (&self.0 * &self.0).trace_product(rho.matrix()).re;
        (sq - mean * mean).max(0.0)
    }

    pub fn square(&self) -> HermitianOperator {
        Self::project(&(&self.0 * &self.0))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    pub fn shift(&self, s: f64) -> Self {
        Self(&self.0 + &ComplexMatrix::identity(self.dim()).scale(s))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(self).values[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *eig_hermitian(self).values.last().expect("non-empty spectrum")
    }
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        HermitianOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// Positive trace-one operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator(ComplexMatrix);

impl DensityOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let h = HermitianOperator::new(m)?;
        let tr = h.matrix().trace();
        if (tr.re - 1.0).abs() > tol::DENSITY || tr.im.abs() > tol::DENSITY {
            return Err(QmuError::NotDensity(format!("trace {tr}")));
        }
        let min = h.min_eigenvalue();
        if min < -tol::DENSITY {
            return Err(QmuError::NotDensity(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self(h.0))
    }

    /// `|ψ><ψ|` after normalizing `ψ`.
    pub fn pure(psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QmuError::NotDensity("zero state vector".into()));
        }
        let v = psi / re(norm);
        Ok(Self(ComplexMatrix::outer(&v, &v).hermitian_part()))
    }

    /// Qubit state `½(1 + r·σ)` with `‖r‖ ≤ 1`.
    pub fn bloch(r: [f64; 3]) -> Result<Self> {
        let n = norm3(r);
        if n > 1.0 + tol::DENSITY {
            return Err(QmuError::NotDensity(format!("Bloch vector length {n}")));
        }
        let m = &ComplexMatrix::identity(2) + &pauli::dot(r);
        Ok(Self(m.scale(0.5)))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim).scale(1.0 / dim as f64))
    }

    /// Convex combination `(1-w) self + w other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(QmuError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self(&self.0.scale(1.0 - w) + &other.0.scale(w)))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn purity(&self) -> f64 {
        self.0.trace_product(&self.0).re
    }

    /// Bloch vector of a qubit state.
    pub fn bloch_vector(&self) -> Option<[f64; 3]> {
        if self.dim() != 2 {
            return None;
        }
        let [x, y, z] = [pauli::x(), pauli::y(), pauli::z()]
            .map(|p| self.0.trace_product(&p).re);
        Some([x, y, z])
    }

    /// A unit vector `ψ` with `ρ = |ψ><ψ|`, if the state is pure.
    pub fn pure_vector(&self) -> Option<CVector> {
        if (self.purity() - 1.0).abs() > tol::PURITY {
            return None;
        }
        let eig = eig_hermitian(&HermitianOperator(self.0.clone()));
        let last = eig.values.len() - 1;
        Some(eig.vectors.matrix().column(last).into_owned())
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        DensityOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// Unitary operator.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOperator(ComplexMatrix);

impl UnitaryOperator {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let n = m.dim();
        let deviation = (&(&m.adjoint() * &m) - &ComplexMatrix::identity(n)).frobenius_norm();
        if deviation > tol::UNITARY {
            return Err(QmuError::NotUnitary { deviation });
        }
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    /// Exchange of two `d`-dimensional factors: `|i>|j> -> |j>|i>`.
    pub fn swap(d: usize) -> Self {
        let n = d * d;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..d {
            for j in 0..d {
                m[(j * d + i, i * d + j)] = re(1.0);
            }
        }
        Self(ComplexMatrix(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Heisenberg-picture conjugation `U^† X U`.
    pub fn conjugate(&self, x: &ComplexMatrix) -> ComplexMatrix {
        &(&self.0.adjoint() * x) * &self.0
    }
}

impl Serialize for UnitaryOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = ComplexMatrix::deserialize(d)?;
        UnitaryOperator::new(m).map_err(serde::de::Error::custom)
    }
}

/// Spectral decomposition `A = V diag(λ) V^†`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> CVector {
        self.vectors.matrix().column(k).into_owned()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = self.vectors.matrix();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|&x| re(x)),
        ));
        ComplexMatrix(v * d * v.adjoint())
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Eigenvalues are sorted ascending. Each eigenvector's largest-magnitude
/// component (the first one, on ties) is rotated to be real and positive.
/// Inside degenerate eigenspaces the basis is whatever the solver returns.
pub fn eig_hermitian(op: &HermitianOperator) -> EigenDecomposition {
    let n = op.dim();
    let se = op.matrix().matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[i]
            .partial_cmp(&se.eigenvalues[j])
            .expect("finite eigenvalues")
    });
    let values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = se.eigenvectors.column(k);
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in v.iter().enumerate() {
            if z.norm() > best + 1e-12 {
                best = z.norm();
                pivot = i;
            }
        }
        let phase = if best > 0.0 {
            v[pivot].conj() / re(v[pivot].norm())
        } else {
            re(1.0)
        };
        for i in 0..n {
            vectors[(i, col)] = v[i] * phase;
        }
    }
    EigenDecomposition {
        values,
        vectors: ComplexMatrix(vectors),
    }
}

/// Kronecker product, object-major.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// Which tensor factor survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keep {
    Object,
    Probe,
}

/// Partial trace over one factor of an object ⊗ probe operator.
pub fn partial_trace(
    op: &ComplexMatrix,
    dims: (usize, usize),
    keep: Keep,
) -> Result<ComplexMatrix> {
    let (d_obj, d_probe) = dims;
    if op.dim() != d_obj * d_probe {
        return Err(QmuError::DimensionMismatch {
            expected: d_obj * d_probe,
            found: op.dim(),
        });
    }
    let m = &op.0;
    let out = match keep {
        Keep::Object => DMatrix::from_fn(d_obj, d_obj, |i, j| {
            (0..d_probe)
                .map(|k| m[(i * d_probe + k, j * d_probe + k)])
                .sum()
        }),
        Keep::Probe => DMatrix::from_fn(d_probe, d_probe, |k, l| {
            (0..d_obj)
                .map(|i| m[(i * d_probe + k, i * d_probe + l)])
                .sum()
        }),
    };
    Ok(ComplexMatrix(out))
}

pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn sub3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale3(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Pauli matrices and Bloch-vector operators.
pub mod pauli {
    use super::*;

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![re(0.0), re(1.0)], vec![re(1.0), re(0.0)]]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![re(0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), re(0.0)]])
            .unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![re(1.0), re(0.0)], vec![re(0.0), re(-1.0)]]).unwrap()
    }

    /// `v·σ`.
    pub fn dot(v: [f64; 3]) -> ComplexMatrix {
        &(&x().scale(v[0]) + &y().scale(v[1])) + &z().scale(v[2])
    }

    pub fn hermitian(v: [f64; 3]) -> HermitianOperator {
        HermitianOperator::project(&dot(v))
    }
}

/// Haar-random unit vector.
pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-12 {
            return v / re(n);
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    DensityOperator::pure(&random_pure_vector(dim, rng)).expect("unit vector")
}

/// Random mixed state from the Hilbert–Schmidt (Ginibre) ensemble.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DensityOperator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityOperator(ComplexMatrix((&w + w.adjoint()) * re(0.5 / tr)))
}

/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> UnitaryOperator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q.clone();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / re(d.norm()) } else { re(1.0) };
        for i in 0..dim {
            u[(i, j)] = q[(i, j)] * phase;
        }
    }
    UnitaryOperator(ComplexMatrix(u))
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOperator {
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    HermitianOperator(ComplexMatrix((&g + g.adjoint()) * re(0.5)))
}

/// Uniform random point on the unit sphere.
pub fn random_unit3<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = norm3(v);
        if n > 1e-12 {
            return scale3(v, 1.0 / n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn herm(m: ComplexMatrix) -> HermitianOperator {
        HermitianOperator::new(m).unwrap()
    }

    #[test]
    fn pauli_z_spectrum() {
        let e = eig_hermitian(&herm(pauli::z()));
        assert_eq!(e.values.len(), 2);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_is_degenerate() {
        let e = eig_hermitian(&HermitianOperator::identity(2));
        assert!(e.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let vv = &e.vectors.adjoint() * &e.vectors;
        assert!(vv.is_close(&ComplexMatrix::identity(2), 1e-12));
    }

    #[test]
    fn half_sum_of_paulis_over_root_two() {
        // ½(σ1+σ2)/√2 has characteristic polynomial λ² - ¼.
        let op = pauli::dot([0.5 / 2f64.sqrt(), 0.5 / 2f64.sqrt(), 0.0]);
        let e = eig_hermitian(&herm(op));
        assert!((e.values[0] + 0.5).abs() < 1e-14);
        assert!((e.values[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn phase_convention_largest_component_real_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(4, &mut rng);
        let e = eig_hermitian(&h);
        for k in 0..4 {
            let v = e.vector(k);
            let (idx, _) = v
                .iter()
                .enumerate()
                .fold((0, -1.0), |(bi, bn), (i, z)| {
                    if z.norm() > bn + 1e-12 {
                        (i, z.norm())
                    } else {
                        (bi, bn)
                    }
                });
            assert!(v[idx].im.abs() < 1e-14 && v[idx].re > 0.0);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_rows(&[vec![re(0.0), re(1.0)], vec![re(0.0), re(0.0)]])
            .unwrap();
        assert!(matches!(
            HermitianOperator::new(m),
            Err(QmuError::NotHermitian { .. })
        ));
    }

    #[test]
    fn non_square_rejected() {
        assert!(ComplexMatrix::from_rows(&[vec![re(1.0), re(0.0)]]).is_err());
    }

    #[test]
    fn identity_tensor_identity() {
        let t = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert!(t.is_close(&ComplexMatrix::identity(6), 0.0));
    }

    #[test]
    fn tensor_spectrum() {
        let t = tensor(&pauli::z(), &ComplexMatrix::identity(2));
        let e = eig_hermitian(&herm(t));
        let expect = [-1.0, -1.0, 1.0, 1.0];
        for (v, x) in e.values.iter().zip(expect) {
            assert!((v - x).abs() < 1e-14);
        }
    }

    #[test]
    fn tensor_ordering_is_object_major() {
        let a = ComplexMatrix::diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::diagonal(&[10.0, 20.0, 30.0]);
        let t = tensor(&a, &b);
        // index (i_obj, i_probe) -> i_obj * 3 + i_probe
        let idx = |o: usize, p: usize| o * 3 + p;
        assert_eq!(t.get(idx(1, 2), idx(1, 2)).re, 60.0);
        assert_eq!(t.get(idx(0, 1), idx(0, 1)).re, 20.0);
    }

    #[test]
    fn partial_traces_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(2, &mut rng);
        let sigma = random_density(3, &mut rng);
        let t = tensor(rho.matrix(), sigma.matrix());
        let obj = partial_trace(&t, (2, 3), Keep::Object).unwrap();
        let probe = partial_trace(&t, (2, 3), Keep::Probe).unwrap();
        assert!(obj.is_close(rho.matrix(), 1e-14));
        assert!(probe.is_close(sigma.matrix(), 1e-14));
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let m = ComplexMatrix::identity(5);
        assert!(matches!(
            partial_trace(&m, (2, 2), Keep::Object),
            Err(QmuError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn swap_exchanges_factors() {
        let a = pauli::x();
        let b = pauli::z();
        let s = UnitaryOperator::swap(2);
        let lhs = s.conjugate(&tensor(&a, &b));
        assert!(lhs.is_close(&tensor(&b, &a), 1e-14));
    }

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(6, &mut rng);
        assert!(UnitaryOperator::new(u.matrix().clone()).is_ok());
    }

    #[test]
    fn density_validation() {
        assert!(DensityOperator::bloch([0.0, 0.0, 1.0]).is_ok());
        assert!(DensityOperator::bloch([0.0, 0.0, 1.1]).is_err());
        let bad = ComplexMatrix::diagonal(&[1.5, -0.5]);
        assert!(DensityOperator::new(bad).is_err());
    }

    #[test]
    fn json_complex_pairs() {
        let m = pauli::y();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[[0.0,0.0],[0.0,-1.0]],[[0.0,1.0],[0.0,0.0]]]");
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
