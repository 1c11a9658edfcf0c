//! Wasserstein-2 deviation between distributions on the real line.

use serde::{Deserialize, Serialize};

use super::distribution::{Coupling, Distribution};

/// `Δ(μ, ν)` together with an optimal coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W2 {
    pub value: f64,
    pub coupling: Coupling,
}

/// Comonotone (quantile) coupling. On the real line it is optimal for the
/// quadratic cost, so `value² = ∫₀¹ (F_μ⁻¹(t) - F_ν⁻¹(t))² dt`.
pub fn w2_quantile(mu: &Distribution, nu: &Distribution) -> W2 {
    let (n, m) = (mu.len(), nu.len());
    let mut a = mu.probabilities().to_vec();
    let mut b = nu.probabilities().to_vec();
    let mut weights = vec![vec![0.0; m]; n];
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        let t = a[i].min(b[j]);
        weights[i][j] += t;
        a[i] -= t;
        b[j] -= t;
        if a[i] <= 0.0 && i + 1 < n {
            i += 1;
        } else if b[j] <= 0.0 && j + 1 < m {
            j += 1;
        } else {
            break;
        }
    }
    // Rounding leftovers (≤ 1e-10) go to the last cells.
    for (k, r) in a.iter().enumerate().skip(i) {
        if *r > 0.0 {
            weights[k][m - 1] += r;
        }
    }
    for (k, r) in b.iter().enumerate().skip(j) {
        if *r > 0.0 {
            weights[n - 1][k] += r;
        }
    }
    let coupling = Coupling {
        row_support: mu.support().to_vec(),
        col_support: nu.support().to_vec(),
        weights,
    };
    W2 {
        value: coupling.deviation(),
        coupling,
    }
}

/// Shorthand for `w2_quantile(mu, nu).value`.
pub fn w2(mu: &Distribution, nu: &Distribution) -> f64 {
    w2_quantile(mu, nu).value
}

/// Bounds on `Δ(μ, ν)` from the first two moments:
/// `(Δμ - Δν)² + (m_μ - m_ν)² ≤ Δ(μ,ν)² ≤ (Δμ + Δν)² + (m_μ - m_ν)²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBounds {
    pub lower: f64,
    pub upper: f64,
}

impl MomentBounds {
    pub fn contains(&self, value: f64, tol: f64) -> bool {
        value >= self.lower - tol && value <= self.upper + tol
    }
}

pub fn moment_bounds(mu: &Distribution, nu: &Distribution) -> MomentBounds {
    let (s, t) = (mu.std_dev(), nu.std_dev());
    let shift = (mu.mean() - nu.mean()).powi(2);
    MomentBounds {
        lower: ((s - t).powi(2) + shift).sqrt(),
        upper: ((s + t).powi(2) + shift).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(pairs: &[(f64, f64)]) -> Distribution {
        Distribution::from_pairs(pairs.iter().copied()).unwrap()
    }

    #[test]
    fn point_measures() {
        assert!((w2(&Distribution::point(1.5), &Distribution::point(-2.0)) - 3.5).abs() < 1e-15);
    }

    #[test]
    fn point_against_two_points() {
        let r = w2_quantile(&Distribution::point(0.0), &dist(&[(0.0, 0.5), (2.0, 0.5)]));
        assert!((r.value * r.value - 2.0).abs() < 1e-14);
        assert_eq!(r.coupling.weights, vec![vec![0.5, 0.5]]);
    }

    #[test]
    fn translation() {
        let mu = dist(&[(-1.0, 0.2), (0.5, 0.3), (3.0, 0.5)]);
        assert!((w2(&mu, &mu.translate(-0.75)) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn coupling_marginals() {
        let mu = dist(&[(-1.0, 0.2), (0.5, 0.3), (3.0, 0.5)]);
        let nu = dist(&[(0.0, 0.6), (1.0, 0.4)]);
        let r = w2_quantile(&mu, &nu);
        assert!(r.coupling.is_coupling_of(&mu, &nu));
        // hand computation: (-1→0, .2), (.5→0, .3), (.5→0, 0)... 3→0 .1, 3→1 .4
        let expect = 0.2 * 1.0 + 0.3 * 0.25 + 0.1 * 9.0 + 0.4 * 4.0;
        assert!((r.value.powi(2) - expect).abs() < 1e-14);
    }

    #[test]
    fn bounds_contain_value() {
        let mu = dist(&[(-1.0, 0.2), (0.5, 0.3), (3.0, 0.5)]);
        let nu = dist(&[(0.0, 0.6), (1.0, 0.4)]);
        assert!(moment_bounds(&mu, &nu).contains(w2(&mu, &nu), 1e-12));
    }
}
