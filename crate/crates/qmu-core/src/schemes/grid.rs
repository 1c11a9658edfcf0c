//! Wavefunctions on a uniform position grid with a discrete-Fourier
//! momentum side, in units `ħ = m = ω = 1`.
//!
//! Grid points are `x_j = -L + j·dx`, `dx = 2L/n`. Momentum outcomes are
//! the discrete frequencies `k_m = π m / L`, `m = -n/2, …, n/2 - 1`, listed
//! in increasing order.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::errmetrics::distance::{extrapolate_to_zero, Calibration, CalibrationPoint};
use crate::errmetrics::distribution::{same_value, Distribution};
use crate::errmetrics::wasserstein::w2;
use crate::error::{QmuError, Result};
use crate::opalg::{eig_hermitian, CVector, ComplexMatrix, HermitianOperator};
use crate::tol;

/// Uniform grid on `[-L, L)` with `n` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSystem {
    n: usize,
    #[serde(rename = "L")]
    half_width: f64,
}

impl GridSystem {
    /// `n` must be a power of two, at least 8.
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(QmuError::InvalidGrid(format!(
                "grid size {n} is not a power of two ≥ 8"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(QmuError::InvalidGrid(format!(
                "half-width {half_width} is not positive"
            )));
        }
        Ok(Self { n, half_width })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        std::f64::consts::PI / self.half_width
    }

    pub fn positions(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.n)
            .map(|j| (j as f64 - (self.n / 2) as f64) * dx)
            .collect()
    }

    /// Momentum outcomes in increasing order.
    pub fn momenta(&self) -> Vec<f64> {
        let dp = self.dp();
        (0..self.n)
            .map(|m| (m as f64 - (self.n / 2) as f64) * dp)
            .collect()
    }

    /// Wave number of FFT bin `m` (unshifted order).
    fn bin_momentum(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 {
            m as f64
        } else {
            m as f64 - self.n as f64
        };
        signed * self.dp()
    }

    fn plans(&self) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut planner = FftPlanner::new();
        (
            planner.plan_fft_forward(self.n),
            planner.plan_fft_inverse(self.n),
        )
    }
}

/// Wavefunction amplitudes `ψ(x_j)` with `Σ|ψ_j|² dx = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    grid: GridSystem,
    amplitudes: Vec<Complex64>,
}

impl GridState {
    pub fn new(grid: GridSystem, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n {
            return Err(QmuError::DimensionMismatch {
                expected: grid.n,
                found: amplitudes.len(),
            });
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
        if (norm - 1.0).abs() > tol::GRID_NORM {
            return Err(QmuError::InvalidGrid(format!(
                "wavefunction norm {norm} differs from 1"
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    /// Normalizes arbitrary samples.
    pub fn from_samples(grid: GridSystem, samples: Vec<Complex64>) -> Result<Self> {
        let norm: f64 = samples.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(QmuError::InvalidGrid("wavefunction vanishes on the grid".into()));
        }
        let s = 1.0 / norm.sqrt();
        Self::new(grid, samples.into_iter().map(|a| a * s).collect())
    }

    /// Gaussian with position mean `center`, position standard deviation
    /// `sigma_x` and mean momentum `momentum`.
    pub fn gaussian(grid: GridSystem, center: f64, sigma_x: f64, momentum: f64) -> Result<Self> {
        if sigma_x.is_nan() || sigma_x <= 0.0 {
            return Err(QmuError::InvalidGrid(format!("width {sigma_x} is not positive")));
        }
        let samples = grid
            .positions()
            .into_iter()
            .map(|x| {
                let env = (-(x - center).powi(2) / (4.0 * sigma_x * sigma_x)).exp();
                Complex64::from_polar(env, momentum * x)
            })
            .collect();
        Self::from_samples(grid, samples)
    }

    /// Oscillator ground state, `ψ₀(x) ∝ exp(-x²/2)`.
    pub fn ground_state(grid: GridSystem) -> Result<Self> {
        Self::gaussian(grid, 0.0, std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    /// Centered Gaussian with position spread `s` times that of the ground
    /// state.
    pub fn squeezed(grid: GridSystem, s: f64) -> Result<Self> {
        Self::gaussian(grid, 0.0, s * std::f64::consts::FRAC_1_SQRT_2, 0.0)
    }

    /// Ground state displaced to `(q, p)`.
    pub fn coherent(grid: GridSystem, q: f64, p: f64) -> Result<Self> {
        Self::gaussian(grid, q, std::f64::consts::FRAC_1_SQRT_2, p)
    }

    pub fn grid(&self) -> GridSystem {
        self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `(Πψ)(x) = ψ(-x)`; the sample at `-L` maps to itself.
    pub fn parity(&self) -> GridState {
        let n = self.grid.n;
        let amplitudes = (0..n).map(|j| self.amplitudes[(n - j) % n]).collect();
        GridState {
            grid: self.grid,
            amplitudes,
        }
    }

    pub fn position_probabilities(&self) -> Vec<f64> {
        let dx = self.grid.dx();
        normalize(self.amplitudes.iter().map(|a| a.norm_sqr() * dx).collect())
    }

    pub fn position_distribution(&self) -> Distribution {
        Distribution::new(self.grid.positions(), self.position_probabilities())
            .expect("normalized grid state")
    }

    /// Momentum-space probabilities in increasing momentum order.
    pub fn momentum_probabilities(&self) -> Vec<f64> {
        let n = self.grid.n;
        let (fwd, _) = self.grid.plans();
        let mut buf = self.amplitudes.clone();
        fwd.process(&mut buf);
        let raw: Vec<f64> = buf.iter().map(|a| a.norm_sqr()).collect();
        normalize((0..n).map(|m| raw[(m + n / 2) % n]).collect())
    }

    pub fn momentum_distribution(&self) -> Distribution {
        Distribution::new(self.grid.momenta(), self.momentum_probabilities())
            .expect("normalized grid state")
    }

    /// Probability mass in the outer eighth of the grid on either side, in
    /// position and in momentum.
    pub fn boundary_mass(&self) -> f64 {
        let n = self.grid.n;
        let edge = n / 8;
        let outer = |p: &[f64]| -> f64 { p[..edge].iter().chain(&p[n - edge..]).sum() };
        outer(&self.position_probabilities()).max(outer(&self.momentum_probabilities()))
    }

    pub fn check_aliasing(&self) -> Result<()> {
        let mass = self.boundary_mass();
        if mass > tol::GRID_ALIASING {
            return Err(QmuError::Aliasing { mass });
        }
        Ok(())
    }

    /// `⟨ψ|φ⟩` with the grid measure.
    pub fn inner(&self, other: &[Complex64]) -> Complex64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .zip(other)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * dx
    }

    /// `⟨ψ|X|ψ⟩` given `Xψ`.
    pub fn expectation_of(&self, applied: &[Complex64]) -> f64 {
        self.inner(applied).re
    }
}

fn normalize(mut p: Vec<f64>) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    p
}

/// `Qψ`.
pub fn apply_position(psi: &GridState) -> Vec<Complex64> {
    psi.grid
        .positions()
        .into_iter()
        .zip(&psi.amplitudes)
        .map(|(x, a)| a * x)
        .collect()
}

/// `g(P)ψ` through the discrete Fourier transform.
pub fn apply_momentum_function(psi: &GridState, g: impl Fn(f64) -> f64) -> Vec<Complex64> {
    momentum_multiply(psi.grid, &psi.amplitudes, g)
}

fn momentum_multiply(grid: GridSystem, v: &[Complex64], g: impl Fn(f64) -> f64) -> Vec<Complex64> {
    let (fwd, inv) = grid.plans();
    let mut buf = v.to_vec();
    fwd.process(&mut buf);
    for (m, b) in buf.iter_mut().enumerate() {
        *b *= g(grid.bin_momentum(m));
    }
    inv.process(&mut buf);
    let scale = 1.0 / grid.n as f64;
    buf.into_iter().map(|b| b * scale).collect()
}

/// `H'ψ` with `H' = P²/2 + Q²/2 - 1/2`, the oscillator Hamiltonian shifted
/// to vanish on its ground state.
pub fn apply_shifted_oscillator(psi: &GridState) -> Vec<Complex64> {
    shifted_oscillator(psi.grid, &psi.amplitudes)
}

/// `H'` applied to arbitrary grid samples.
pub fn shifted_oscillator(grid: GridSystem, v: &[Complex64]) -> Vec<Complex64> {
    let kinetic = momentum_multiply(grid, v, |k| 0.5 * k * k);
    grid.positions()
        .into_iter()
        .zip(kinetic)
        .zip(v)
        .map(|((x, t), a)| t + a * (0.5 * x * x - 0.5))
        .collect()
}

/// Dense matrix of a linear map on grid samples, in the orthonormal basis
/// of normalized grid deltas. Meant for small grids.
pub fn operator_matrix(
    grid: GridSystem,
    apply: impl Fn(&[Complex64]) -> Vec<Complex64>,
) -> HermitianOperator {
    let n = grid.n;
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        for (i, v) in apply(&e).into_iter().enumerate() {
            m[(i, j)] = v;
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    HermitianOperator::project(&ComplexMatrix::new(m).expect("square grid matrix"))
}

/// Outcome distribution of the spectral measure of `op` in the grid state.
pub fn spectral_distribution(op: &HermitianOperator, psi: &GridState) -> Result<Distribution> {
    let n = psi.grid.n;
    if op.dim() != n {
        return Err(QmuError::DimensionMismatch {
            expected: n,
            found: op.dim(),
        });
    }
    let s = psi.grid.dx().sqrt();
    let v = CVector::from_iterator(n, psi.amplitudes.iter().map(|a| a * s));
    let e = eig_hermitian(op);
    let pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (e.values[k], e.vector(k).dotc(&v).norm_sqr()))
        .collect();
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    Ok(Distribution::from_pairs(pairs.into_iter().map(|(x, p)| (x, p / total)))?.trimmed())
}

/// `‖v‖²` with the grid measure.
pub fn grid_norm_sqr(grid: GridSystem, v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.dx()
}

/// Marginals of a covariant phase-space measurement with generating state
/// `τ`: `μ_τ = Q_{ΠτΠ}` and `ν_τ = P_{ΠτΠ}`.
pub fn phase_space_marginals(tau: &GridState) -> Result<(Distribution, Distribution)> {
    tau.check_aliasing()?;
    let flipped = tau.parity();
    Ok((
        flipped.position_distribution(),
        flipped.momentum_distribution(),
    ))
}

/// Probe wavefunction of a von Neumann position measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ProbeState {
    /// `|φ(y)|²` Gaussian with the given mean and standard deviation.
    Gaussian { center: f64, width: f64 },
}

impl ProbeState {
    fn amplitude(&self, y: f64) -> Complex64 {
        match *self {
            ProbeState::Gaussian { center, width } => {
                Complex64::new((-(y - center).powi(2) / (4.0 * width * width)).exp(), 0.0)
            }
        }
    }
}

/// Von Neumann model `U = e^{iλQ⊗P_p}`, pointer `Q_p`, pointer function
/// `f(y) = -y/λ`: the probe is translated, `φ(y) ↦ φ(y + λx)`.
///
/// The probe lives on a grid of spacing `λ·dx` with twice as many points
/// as the object grid, so every translation is a whole number of probe
/// cells and the FFT shift is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct VonNeumannModel {
    grid: GridSystem,
    lambda: f64,
    probe: ProbeState,
    probe_grid: GridSystem,
    probe_amplitudes: Vec<Complex64>,
}

/// Joint wavefunction after the coupling, `Ψ[j][k] = ψ(x_j) φ(y_k + λx_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointWavefunction {
    pub amplitudes: Vec<Vec<Complex64>>,
    pub object_dx: f64,
    pub probe_dy: f64,
}

pub fn von_neumann_scheme(grid: GridSystem, lambda: f64, probe: ProbeState) -> Result<VonNeumannModel> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(QmuError::InvalidGrid(format!(
            "coupling strength {lambda} is not positive"
        )));
    }
    let probe_grid = GridSystem::new(2 * grid.n, lambda * grid.dx() * grid.n as f64)?;
    let samples = probe_grid
        .positions()
        .into_iter()
        .map(|y| probe.amplitude(y))
        .collect();
    let state = GridState::from_samples(probe_grid, samples)?;
    state.check_aliasing()?;
    Ok(VonNeumannModel {
        grid,
        lambda,
        probe,
        probe_grid,
        probe_amplitudes: state.amplitudes,
    })
}

impl VonNeumannModel {
    pub fn grid(&self) -> GridSystem {
        self.grid
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn probe(&self) -> ProbeState {
        self.probe
    }

    /// Pointer reading `y ↦ -y/λ` for every probe grid point.
    pub fn labels(&self) -> Vec<f64> {
        self.probe_grid
            .positions()
            .into_iter()
            .map(|y| -y / self.lambda)
            .collect()
    }

    /// Noise distribution `μ`: the law of `-u/λ` with `u ~ |φ(u)|²`.
    pub fn noise_distribution(&self) -> Distribution {
        let dy = self.probe_grid.dx();
        let pairs = self
            .labels()
            .into_iter()
            .zip(&self.probe_amplitudes)
            .map(|(z, a)| (z, a.norm_sqr() * dy))
            .collect::<Vec<_>>();
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Distribution::from_pairs(pairs.into_iter().map(|(z, p)| (z, p / total)))
            .expect("normalized probe")
            .trimmed()
    }

    /// Applies the coupling to `ψ ⊗ φ`, translating the probe by FFT phase
    /// multiplication.
    pub fn simulate(&self, psi: &GridState) -> Result<JointWavefunction> {
        if psi.grid != self.grid {
            return Err(QmuError::InvalidGrid("state lives on a different grid".into()));
        }
        psi.check_aliasing()?;
        let np = self.probe_grid.n;
        let (fwd, inv) = self.probe_grid.plans();
        let mut spectrum = self.probe_amplitudes.clone();
        fwd.process(&mut spectrum);
        let scale = 1.0 / np as f64;
        let amplitudes = self
            .grid
            .positions()
            .into_iter()
            .zip(&psi.amplitudes)
            .map(|(x, a)| {
                let shift = self.lambda * x;
                let mut buf: Vec<Complex64> = spectrum
                    .iter()
                    .enumerate()
                    .map(|(m, s)| s * Complex64::from_polar(1.0, self.probe_grid.bin_momentum(m) * shift))
                    .collect();
                inv.process(&mut buf);
                buf.into_iter().map(|b| b * (a * scale)).collect()
            })
            .collect();
        Ok(JointWavefunction {
            amplitudes,
            object_dx: self.grid.dx(),
            probe_dy: self.probe_grid.dx(),
        })
    }

    /// Distribution of the pointer reading after the coupling.
    pub fn output_distribution(&self, psi: &GridState) -> Result<Distribution> {
        let joint = self.simulate(psi)?;
        let w = joint.object_dx * joint.probe_dy;
        let np = self.probe_grid.n;
        let probs: Vec<f64> = (0..np)
            .map(|k| joint.amplitudes.iter().map(|row| row[k].norm_sqr()).sum::<f64>() * w)
            .collect();
        let pairs: Vec<(f64, f64)> = self.labels().into_iter().zip(probs).collect();
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        Ok(Distribution::from_pairs(pairs.into_iter().map(|(z, p)| (z, p / total)))?.trimmed())
    }

    /// `⟨N²⟩` with `N = f(Q_p) - Q⊗1` evaluated on the joint wavefunction.
    pub fn eps_no_scheme(&self, psi: &GridState) -> Result<f64> {
        let joint = self.simulate(psi)?;
        let labels = self.labels();
        let w = joint.object_dx * joint.probe_dy;
        let mut acc = 0.0;
        for (x, row) in self.grid.positions().into_iter().zip(&joint.amplitudes) {
            for (z, a) in labels.iter().zip(row) {
                acc += (z - x).powi(2) * a.norm_sqr() * w;
            }
        }
        Ok(acc.sqrt())
    }

    /// Moment form: `C[x] = Q + μ[x]`, `C[x²] = Q² + 2μ[x]Q + μ[x²]`.
    pub fn eps_no_moments(&self, psi: &GridState) -> f64 {
        let mu = self.noise_distribution();
        let (m1, m2) = (mu.mean(), mu.second_moment());
        let q = psi.position_distribution();
        let (q1, q2) = (q.mean(), q.second_moment());
        let c2 = q2 + 2.0 * m1 * q1 + m2;
        let c1sq = q2 + 2.0 * m1 * q1 + m1 * m1;
        let intrinsic = c2 - c1sq;
        let deviation = m1 * m1;
        (intrinsic + deviation).max(0.0).sqrt()
    }

    /// Three-state form with `ρ₁ = QρQ`, `ρ₂ = (Q+1)ρ(Q+1)`; all operators
    /// are functions of `Q`.
    pub fn eps_no_three_state(&self, psi: &GridState) -> f64 {
        let mu = self.noise_distribution();
        let (m1, m2) = (mu.mean(), mu.second_moment());
        let xs = self.grid.positions();
        let p = psi.position_probabilities();
        let ev = |f: &dyn Fn(f64) -> f64| -> f64 { xs.iter().zip(&p).map(|(x, w)| f(*x) * w).sum() };
        let c1 = |x: f64| x + m1;
        let c2 = |x: f64| x * x + 2.0 * m1 * x + m2;
        let v = ev(&|x| x * x) + ev(&c2) + ev(&c1) + ev(&|x| x * c1(x) * x)
            - ev(&|x| (x + 1.0) * c1(x) * (x + 1.0));
        v.max(0.0).sqrt()
    }

    /// Value comparison on the commuting pair `(Q, μ*Q)`:
    /// `Σ (x - z)² ψ(x)² μ(z - x)`.
    pub fn eps_no_value_comparison(&self, psi: &GridState) -> f64 {
        let mu = self.noise_distribution();
        let p = psi.position_probabilities();
        let mut acc = 0.0;
        for (_, w) in self.grid.positions().into_iter().zip(&p) {
            for (shift, q) in mu.iter() {
                acc += shift * shift * w * q;
            }
        }
        acc.sqrt()
    }

    /// `Δ(Q, μ*Q)` evaluated over position eigenstates and the given
    /// states; the sup is `√μ[x²]`.
    pub fn worst_case(&self, states: &[GridState]) -> Result<f64> {
        let mu = self.noise_distribution();
        // a grid position eigenstate x_j gives the pair (δ_{x_j}, μ shifted by x_j)
        let mut best = w2(&Distribution::point(0.0), &mu);
        for s in states {
            let q = s.position_distribution();
            best = best.max(w2(&q, &q.convolve(&mu)));
        }
        Ok(best)
    }

    /// Calibration error of `μ*Q` against `Q` over centered Gaussians of
    /// shrinking width.
    pub fn calibration(&self, schedule: &[f64]) -> Result<Calibration> {
        let mu = self.noise_distribution();
        let widths: Vec<f64> = schedule
            .iter()
            .flat_map(|e| [1.0, 0.5, 0.25].map(|t| e * t))
            .collect();
        let mut family = Vec::with_capacity(widths.len());
        for &s in &widths {
            let st = GridState::gaussian(self.grid, 0.0, s, 0.0)?;
            let q = st.position_distribution();
            let c = q.convolve(&mu);
            family.push((q.mean(), q.variance(), c));
        }
        let mut points = Vec::with_capacity(schedule.len());
        for &eps in schedule {
            let mut best = 0.0f64;
            for (m, var, c) in &family {
                if *var > eps * eps {
                    continue;
                }
                let h = (eps * eps - var).sqrt();
                for y in [m - h, m + h] {
                    best = best.max(c.deviation_from_point(y));
                }
            }
            points.push(CalibrationPoint { eps, value: best });
        }
        let limit = mu.deviation_from_point(0.0);
        let origin = self
            .grid
            .positions()
            .iter()
            .position(|x| same_value(*x, 0.0))
            .expect("grid contains the origin");
        let mut state = CVector::zeros(self.grid.n);
        state[origin] = Complex64::new(1.0, 0.0);
        Ok(Calibration {
            extrapolated: extrapolate_to_zero(&points),
            schedule: points,
            limit,
            state,
        })
    }
}

/// Largest pointwise probability difference after aligning supports.
pub fn max_probability_gap(a: &Distribution, b: &Distribution) -> f64 {
    let mut pairs: Vec<(f64, f64)> = a.iter().collect();
    pairs.extend(b.iter().map(|(x, p)| (x, -p)));
    crate::errmetrics::distribution::merge_values(pairs, |s, t| *s += t)
        .into_iter()
        .map(|(_, d)| d.abs())
        .fold(0.0, f64::max)
}
