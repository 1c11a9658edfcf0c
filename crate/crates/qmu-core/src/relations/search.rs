//! Derivative-free minimization used by the violation finders and the
//! qubit error-bound search.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::RelationVerdict;
use crate::error::Result;
use crate::rng;

/// Nelder–Mead settings.
#[derive(Clone, Copy, Debug)]
pub struct NelderMead {
    pub max_evals: usize,
    pub initial_step: f64,
    /// Stop when the simplex values spread less than this.
    pub tolerance: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            initial_step: 0.1,
            tolerance: 1e-14,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction ½,
/// shrink ½).
pub fn nelder_mead(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], opts: NelderMead) -> Minimum {
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0, &mut evals)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }
    while evals < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= opts.tolerance {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|i| simplex[..n].iter().map(|p| p.0[i]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-1.0);
        let fr = eval(&xr, &mut evals);
        if fr < best {
            let xe = along(-2.0);
            let fe = eval(&xe, &mut evals);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let x = along(-0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x, &mut evals);
                (x, v)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    for (xi, bi) in p.0.iter_mut().zip(&x0) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    p.1 = eval(&p.0, &mut evals);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    Minimum {
        point,
        value,
        evaluations: evals,
    }
}

/// Outcome of a seeded falsification attempt.
#[derive(Clone, Debug, Serialize)]
pub struct ViolationSearch {
    /// Verdict with the smallest slack found.
    pub best: RelationVerdict,
    /// Parameters in `[0, 1]^k` producing `best`.
    pub parameters: Vec<f64>,
    pub evaluations: usize,
    pub found: bool,
}

/// Minimizes the slack of a parameterized relation over `[0, 1]^dim`.
///
/// Three quarters of the budget go to seeded uniform samples (evaluated in
/// parallel, ordered deterministically), the rest to Nelder–Mead from the
/// four best samples, with parameters clamped to the unit cube.
pub fn search_violation<F>(family: F, dim: usize, budget: usize, seed: u64) -> Result<ViolationSearch>
where
    F: Fn(&[f64]) -> Result<RelationVerdict> + Sync,
{
    let budget = budget.max(8);
    let samples = budget * 3 / 4;
    let mut r = rng::stream(seed, 0);
    let points: Vec<Vec<f64>> = (0..samples)
        .map(|_| (0..dim).map(|_| r.gen::<f64>()).collect())
        .collect();
    let verdicts: Vec<RelationVerdict> = points
        .par_iter()
        .map(|p| family(p))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..samples).collect();
    order.sort_by(|&i, &j| verdicts[i].slack.total_cmp(&verdicts[j].slack).then(i.cmp(&j)));
    let mut best = verdicts[order[0]].clone();
    let mut best_params = points[order[0]].clone();
    let mut evaluations = samples;

    let starts = order.iter().take(4).copied().collect::<Vec<_>>();
    let per_start = (budget - samples) / starts.len().max(1);
    let clamp = |x: &[f64]| -> Vec<f64> { x.iter().map(|v| v.clamp(0.0, 1.0)).collect() };
    for s in starts {
        let mut failure = None;
        let m = nelder_mead(
            |x| match family(&clamp(x)) {
                Ok(v) => v.slack,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            },
            &points[s],
            NelderMead {
                max_evals: per_start,
                initial_step: 0.05,
                tolerance: 1e-15,
            },
        );
        if let Some(e) = failure {
            return Err(e);
        }
        evaluations += m.evaluations;
        let p = clamp(&m.point);
        let v = family(&p)?;
        evaluations += 1;
        if v.slack < best.slack {
            best = v;
            best_params = p;
        }
    }
    let found = !best.holds;
    Ok(ViolationSearch {
        best,
        parameters: best_params,
        evaluations,
        found,
    })
}
