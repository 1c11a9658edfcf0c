//! Linear-programming oracle for the Wasserstein-2 deviation.
//!
//! Solves the transportation problem `min Σ γ_ij (x_i - y_j)²` over couplings
//! with the transportation simplex (northwest-corner start, MODI duals,
//! Bland's rule). Small instances run in exact rational arithmetic.

use std::collections::VecDeque;

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

use super::distribution::{Coupling, Distribution};
use crate::error::{QmuError, Result};

/// Largest support size accepted by the oracle.
pub const ORACLE_LIMIT: usize = 64;
/// Largest support size solved in exact arithmetic.
pub const EXACT_LIMIT: usize = 16;

const MAX_PIVOTS: usize = 1_000_000;

trait Scalar:
    Clone
    + PartialOrd
    + Signed
    + for<'a> std::ops::AddAssign<&'a Self>
    + for<'a> std::ops::SubAssign<&'a Self>
{
    fn lift(x: f64) -> Self;
    fn lower(&self) -> f64;
    /// Reduced costs below `-tolerance` are improving.
    fn tolerance() -> Self;
}

impl Scalar for f64 {
    fn lift(x: f64) -> Self {
        x
    }
    fn lower(&self) -> f64 {
        *self
    }
    fn tolerance() -> Self {
        1e-13
    }
}

impl Scalar for BigRational {
    fn lift(x: f64) -> Self {
        BigRational::from_f64(x).expect("finite input")
    }
    fn lower(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
    fn tolerance() -> Self {
        BigRational::zero()
    }
}

/// Optimal value and coupling of the transportation problem.
#[derive(Clone, Debug)]
pub struct OracleSolution {
    pub value: f64,
    pub coupling: Coupling,
    /// Solved in exact rational arithmetic.
    pub exact: bool,
    pub pivots: usize,
}

/// `Δ(μ, ν)` by linear programming over couplings.
pub fn w2_lp_oracle(mu: &Distribution, nu: &Distribution) -> Result<OracleSolution> {
    let size = mu.len().max(nu.len());
    if size > ORACLE_LIMIT {
        return Err(QmuError::OracleScale {
            size,
            limit: ORACLE_LIMIT,
        });
    }
    if size <= EXACT_LIMIT {
        let supply = balanced::<BigRational>(mu.probabilities());
        let demand = balanced::<BigRational>(nu.probabilities());
        let cost = cost_matrix::<BigRational>(mu.support(), nu.support());
        let (flows, pivots) = solve(supply, demand, &cost)?;
        Ok(finish(mu, nu, &flows, &cost, true, pivots))
    } else {
        let supply = mu.probabilities().to_vec();
        let mut demand = nu.probabilities().to_vec();
        // put the (≤ 1e-10) imbalance on the largest demand
        let gap = supply.iter().sum::<f64>() - demand.iter().sum::<f64>();
        let k = argmax(&demand);
        demand[k] += gap;
        let cost = cost_matrix::<f64>(mu.support(), nu.support());
        let (flows, pivots) = solve(supply, demand, &cost)?;
        Ok(finish(mu, nu, &flows, &cost, false, pivots))
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut k = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[k] {
            k = i;
        }
    }
    k
}

/// Exact lift of the probabilities, with the largest entry adjusted so the
/// total is exactly one.
fn balanced<T: Scalar>(p: &[f64]) -> Vec<T> {
    let mut out: Vec<T> = p.iter().map(|&x| T::lift(x)).collect();
    let k = argmax(p);
    let mut rest = T::zero();
    for (i, x) in out.iter().enumerate() {
        if i != k {
            rest += x;
        }
    }
    out[k] = T::one() - rest;
    out
}

fn cost_matrix<T: Scalar>(xs: &[f64], ys: &[f64]) -> Vec<Vec<T>> {
    xs.iter()
        .map(|&x| {
            let x = T::lift(x);
            ys.iter()
                .map(|&y| {
                    let d = x.clone() - T::lift(y);
                    d.clone() * d
                })
                .collect()
        })
        .collect()
}

fn finish<T: Scalar>(
    mu: &Distribution,
    nu: &Distribution,
    flows: &[Vec<T>],
    cost: &[Vec<T>],
    exact: bool,
    pivots: usize,
) -> OracleSolution {
    let mut total = T::zero();
    for (fr, cr) in flows.iter().zip(cost) {
        for (f, c) in fr.iter().zip(cr) {
            total += &(f.clone() * c.clone());
        }
    }
    let weights = flows
        .iter()
        .map(|r| r.iter().map(|f| f.lower().max(0.0)).collect())
        .collect();
    OracleSolution {
        value: total.lower().max(0.0).sqrt(),
        coupling: Coupling {
            row_support: mu.support().to_vec(),
            col_support: nu.support().to_vec(),
            weights,
        },
        exact,
        pivots,
    }
}

/// Transportation simplex. Returns the optimal flow matrix and the number of
/// pivots.
fn solve<T: Scalar>(
    mut supply: Vec<T>,
    mut demand: Vec<T>,
    cost: &[Vec<T>],
) -> Result<(Vec<Vec<T>>, usize)> {
    let (n, m) = (supply.len(), demand.len());
    let mut flow = vec![vec![T::zero(); m]; n];
    let mut basic = vec![vec![false; m]; n];

    // Northwest corner; degenerate zero cells are kept so the basis is a
    // spanning tree with n + m - 1 cells.
    let (mut i, mut j) = (0, 0);
    loop {
        let t = if supply[i] < demand[j] {
            supply[i].clone()
        } else {
            demand[j].clone()
        };
        flow[i][j] = t.clone();
        basic[i][j] = true;
        supply[i] -= &t;
        demand[j] -= &t;
        if i + 1 == n && j + 1 == m {
            break;
        }
        if (supply[i].is_zero() || j + 1 == m) && i + 1 < n {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut pivots = 0;
    loop {
        let (u, v) = duals(&basic, cost);
        let mut entering = None;
        'scan: for (i, row) in cost.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if basic[i][j] {
                    continue;
                }
                let r = c.clone() - u[i].clone() - v[j].clone();
                if r < -T::tolerance() {
                    entering = Some((i, j));
                    break 'scan;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            return Ok((flow, pivots));
        };
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(QmuError::Numerical(
                "transportation simplex exceeded the pivot budget".into(),
            ));
        }

        // Path in the basis tree from column ej back to row ei; with the
        // entering cell it closes the pivot cycle.
        let path = tree_path(&basic, ei, ej);
        // path = [(ei, j1), (i1, j1), (i1, j2), ..., (ik, ej)]
        // alternating signs: entering +, path[0] -, path[1] +, ...
        let mut theta: Option<(T, usize)> = None;
        for (k, &(pi, pj)) in path.iter().enumerate() {
            if k % 2 == 0 {
                let f = &flow[pi][pj];
                let better = match &theta {
                    None => true,
                    Some((t, idx)) => {
                        f < t || (f == t && pi * m + pj < path[*idx].0 * m + path[*idx].1)
                    }
                };
                if better {
                    theta = Some((f.clone(), k));
                }
            }
        }
        let (theta, leave) = theta.expect("cycle has a decreasing cell");
        flow[ei][ej] = theta.clone();
        basic[ei][ej] = true;
        for (k, &(pi, pj)) in path.iter().enumerate() {
            if k % 2 == 0 {
                flow[pi][pj] -= &theta;
            } else {
                flow[pi][pj] += &theta;
            }
        }
        let (li, lj) = path[leave];
        basic[li][lj] = false;
        flow[li][lj] = T::zero();
    }
}

/// Potentials with `u_i + v_j = c_ij` on basic cells and `u_0 = 0`.
fn duals<T: Scalar>(basic: &[Vec<bool>], cost: &[Vec<T>]) -> (Vec<T>, Vec<T>) {
    let (n, m) = (basic.len(), basic[0].len());
    let mut u: Vec<Option<T>> = vec![None; n];
    let mut v: Vec<Option<T>> = vec![None; m];
    u[0] = Some(T::zero());
    let mut queue = VecDeque::from([(true, 0usize)]);
    while let Some((is_row, k)) = queue.pop_front() {
        if is_row {
            let ui = u[k].clone().expect("visited");
            for j in 0..m {
                if basic[k][j] && v[j].is_none() {
                    v[j] = Some(cost[k][j].clone() - ui.clone());
                    queue.push_back((false, j));
                }
            }
        } else {
            let vj = v[k].clone().expect("visited");
            for i in 0..n {
                if basic[i][k] && u[i].is_none() {
                    u[i] = Some(cost[i][k].clone() - vj.clone());
                    queue.push_back((true, i));
                }
            }
        }
    }
    (
        u.into_iter().map(|x| x.expect("basis spans rows")).collect(),
        v.into_iter().map(|x| x.expect("basis spans columns")).collect(),
    )
}

/// Basic cells on the tree path from row `ei` to column `ej`, starting at a
/// cell in row `ei` and ending at a cell in column `ej`.
fn tree_path(basic: &[Vec<bool>], ei: usize, ej: usize) -> Vec<(usize, usize)> {
    let (n, m) = (basic.len(), basic[0].len());
    // nodes: rows 0..n, columns n..n+m
    let mut parent: Vec<Option<usize>> = vec![None; n + m];
    let mut seen = vec![false; n + m];
    seen[ei] = true;
    let mut queue = VecDeque::from([ei]);
    while let Some(node) = queue.pop_front() {
        if node == n + ej {
            break;
        }
        if node < n {
            for j in 0..m {
                if basic[node][j] && !seen[n + j] {
                    seen[n + j] = true;
                    parent[n + j] = Some(node);
                    queue.push_back(n + j);
                }
            }
        } else {
            let j = node - n;
            for i in 0..n {
                if basic[i][j] && !seen[i] {
                    seen[i] = true;
                    parent[i] = Some(node);
                    queue.push_back(i);
                }
            }
        }
    }
    let mut nodes = vec![n + ej];
    let mut cur = n + ej;
    while let Some(p) = parent[cur] {
        nodes.push(p);
        cur = p;
    }
    nodes.reverse();
    debug_assert_eq!(nodes[0], ei);
    nodes
        .windows(2)
        .map(|w| {
            if w[0] < n {
                (w[0], w[1] - n)
            } else {
                (w[1], w[0] - n)
            }
        })
        .collect()
}
