//! Finitely supported probability measures on the real line and couplings.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{QmuError, Result};
use crate::tol;

/// `|x - y|` small enough, relative to the magnitudes involved, to count as
/// the same outcome value.
pub fn same_value(x: f64, y: f64) -> bool {
    (x - y).abs() <= tol::OUTCOME_MERGE * x.abs().max(y.abs()).max(1.0)
}

/// Sort `(value, weight)` pairs and merge values that coincide under
/// [`same_value`]. A merged cluster is labelled by the mean of its members
/// and carries the summed weight. Clusters are anchored at their smallest
/// member so merging never chains across a wide interval.
pub fn merge_values<W: Clone>(
    mut pairs: Vec<(f64, W)>,
    mut combine: impl FnMut(&mut W, W),
) -> Vec<(f64, W)> {
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    let mut out: Vec<(f64, W)> = Vec::with_capacity(pairs.len());
    let mut anchor = f64::NAN;
    let mut members = 0usize;
    let mut sum = 0.0;
    for (x, w) in pairs {
        if !out.is_empty() && same_value(anchor, x) {
            let last = out.last_mut().expect("non-empty");
            combine(&mut last.1, w);
            members += 1;
            sum += x;
            last.0 = sum / members as f64;
        } else {
            anchor = x;
            members = 1;
            sum = x;
            out.push((x, w));
        }
    }
    out
}

/// Probability measure with finite support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    support: Vec<f64>,
    probabilities: Vec<f64>,
}

impl Distribution {
    /// Support must be strictly increasing and finite; probabilities
    /// nonnegative and summing to one.
    pub fn new(support: Vec<f64>, probabilities: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(QmuError::InvalidDistribution("empty support".into()));
        }
        if support.len() != probabilities.len() {
            return Err(QmuError::InvalidDistribution(format!(
                "{} support points but {} probabilities",
                support.len(),
                probabilities.len()
            )));
        }
        if support.iter().chain(&probabilities).any(|x| !x.is_finite()) {
            return Err(QmuError::InvalidDistribution("non-finite entry".into()));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QmuError::InvalidDistribution(
                "support is not strictly increasing".into(),
            ));
        }
        if let Some(p) = probabilities.iter().find(|&&p| p < 0.0) {
            return Err(QmuError::InvalidDistribution(format!(
                "negative probability {p}"
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > tol::PROBABILITY_SUM {
            return Err(QmuError::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self {
            support,
            probabilities,
        })
    }

    /// Builds a distribution from unsorted pairs, merging coincident values.
    /// Zero-weight points are kept.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let merged = merge_values(pairs.into_iter().collect(), |a, b| *a += b);
        let (support, probabilities) = merged.into_iter().unzip();
        Self::new(support, probabilities)
    }

    /// Dirac measure `δ_y`.
    pub fn point(y: f64) -> Self {
        Self {
            support: vec![y],
            probabilities: vec![1.0],
        }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support
            .iter()
            .copied()
            .zip(self.probabilities.iter().copied())
    }

    /// `∫ xⁿ dμ`.
    pub fn moment(&self, n: i32) -> f64 {
        self.iter().map(|(x, p)| p * x.powi(n)).sum()
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn second_moment(&self) -> f64 {
        self.moment(2)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(x, p)| p * (x - m) * (x - m)).sum()
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// `Δ(μ, δ_y) = (∫ |x - y|² dμ)^½`.
    pub fn deviation_from_point(&self, y: f64) -> f64 {
        self.iter()
            .map(|(x, p)| p * (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Image under `x ↦ x + t`.
    pub fn translate(&self, t: f64) -> Self {
        Self::from_pairs(self.iter().map(|(x, p)| (x + t, p))).expect("translation is valid")
    }

    /// Image under `x ↦ λx`.
    pub fn scale(&self, lambda: f64) -> Self {
        Self::from_pairs(self.iter().map(|(x, p)| (lambda * x, p))).expect("scaling is valid")
    }

    /// Image under `x ↦ -x`.
    pub fn reflect(&self) -> Self {
        self.scale(-1.0)
    }

    /// Convolution `μ * ν`, the law of `X + Y` for independent `X ~ μ`, `Y ~ ν`.
    pub fn convolve(&self, other: &Self) -> Self {
        let pairs: Vec<(f64, f64)> = self
            .iter()
            .flat_map(|(x, p)| other.iter().map(move |(y, q)| (x + y, p * q)))
            .collect();
        Self::from_pairs(pairs).expect("convolution is valid")
    }

    /// Drops support points with zero probability.
    pub fn trimmed(&self) -> Self {
        let pairs: Vec<(f64, f64)> = self.iter().filter(|&(_, p)| p > 0.0).collect();
        if pairs.is_empty() {
            return self.clone();
        }
        let (support, probabilities) = pairs.into_iter().unzip();
        Self {
            support,
            probabilities,
        }
    }

    /// Reads two-column `value,probability` CSV. A header row is skipped if
    /// its first field is not numeric.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut pairs = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(QmuError::Parse(format!(
                    "row {}: expected 2 columns, found {}",
                    line + 1,
                    record.len()
                )));
            }
            let parse = |s: &str| s.parse::<f64>();
            match (parse(&record[0]), parse(&record[1])) {
                (Ok(x), Ok(p)) => pairs.push((x, p)),
                _ if line == 0 => continue,
                _ => {
                    return Err(QmuError::Parse(format!(
                        "row {}: non-numeric entry",
                        line + 1
                    )))
                }
            }
        }
        if pairs.is_empty() {
            return Err(QmuError::Parse("no data rows".into()));
        }
        Self::from_pairs(pairs).map_err(|e| QmuError::Parse(e.to_string()))
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["value", "probability"])?;
        for (x, p) in self.iter() {
            w.write_record([format!("{x:.17e}"), format!("{p:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Joint measure on `row_support × col_support`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub row_support: Vec<f64>,
    pub col_support: Vec<f64>,
    /// `weights[i][j]` is the mass at `(row_support[i], col_support[j])`.
    pub weights: Vec<Vec<f64>>,
}

impl Coupling {
    pub fn new(row_support: Vec<f64>, col_support: Vec<f64>, weights: Vec<Vec<f64>>) -> Result<Self> {
        if weights.len() != row_support.len()
            || weights.iter().any(|r| r.len() != col_support.len())
        {
            return Err(QmuError::InvalidDistribution(
                "coupling weight matrix has wrong shape".into(),
            ));
        }
        if weights.iter().flatten().any(|&w| w < 0.0 || !w.is_finite()) {
            return Err(QmuError::InvalidDistribution(
                "coupling weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self {
            row_support,
            col_support,
            weights,
        })
    }

    /// The product coupling `μ × ν`.
    pub fn product(mu: &Distribution, nu: &Distribution) -> Self {
        let weights = mu
            .probabilities()
            .iter()
            .map(|p| nu.probabilities().iter().map(|q| p * q).collect())
            .collect();
        Self {
            row_support: mu.support().to_vec(),
            col_support: nu.support().to_vec(),
            weights,
        }
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.weights.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_marginal(&self) -> Vec<f64> {
        (0..self.col_support.len())
            .map(|j| self.weights.iter().map(|r| r[j]).sum())
            .collect()
    }

    /// `∫ |x - y|² dγ`.
    pub fn cost(&self) -> f64 {
        let mut acc = 0.0;
        for (i, row) in self.weights.iter().enumerate() {
            for (j, w) in row.iter().enumerate() {
                let d = self.row_support[i] - self.col_support[j];
                acc += w * d * d;
            }
        }
        acc
    }

    /// `Δ^γ(μ, ν)`.
    pub fn deviation(&self) -> f64 {
        self.cost().sqrt()
    }

    /// Largest marginal mismatch against `μ` (rows) and `ν` (columns).
    pub fn marginal_defect(&self, mu: &Distribution, nu: &Distribution) -> f64 {
        if self.row_support != mu.support() || self.col_support != nu.support() {
            return f64::INFINITY;
        }
        let rows = self
            .row_marginal()
            .iter()
            .zip(mu.probabilities())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let cols = self
            .col_marginal()
            .iter()
            .zip(nu.probabilities())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        rows.max(cols)
    }

    pub fn is_coupling_of(&self, mu: &Distribution, nu: &Distribution) -> bool {
        self.marginal_defect(mu, nu) <= tol::COUPLING_MARGINAL
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "weight"])?;
        for (i, row) in self.weights.iter().enumerate() {
            for (j, &wt) in row.iter().enumerate() {
                if wt > 0.0 {
                    w.write_record([
                        format!("{:.17e}", self.row_support[i]),
                        format!("{:.17e}", self.col_support[j]),
                        format!("{wt:.17e}"),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Distribution::new(vec![0.0, 1.0], vec![0.5, 0.5]).is_ok());
        assert!(Distribution::new(vec![1.0, 0.0], vec![0.5, 0.5]).is_err());
        assert!(Distribution::new(vec![0.0, 1.0], vec![0.6, 0.5]).is_err());
        assert!(Distribution::new(vec![0.0, 1.0], vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![], vec![]).is_err());
    }

    #[test]
    fn from_pairs_merges() {
        let d = Distribution::from_pairs([(1.0, 0.25), (0.0, 0.5), (1.0 + 1e-12, 0.25)]).unwrap();
        assert_eq!(d.len(), 2);
        assert!((d.probabilities()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn moments() {
        let mu = Distribution::from_pairs([(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(mu.mean(), 0.0);
        assert_eq!(mu.variance(), 0.5);
        assert_eq!(mu.deviation_from_point(1.0), (0.25 * 4.0 + 0.5f64).sqrt());
    }

    #[test]
    fn convolution_adds_variances() {
        let mu = Distribution::from_pairs([(-1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        let nu = Distribution::from_pairs([(0.0, 0.3), (3.0, 0.7)]).unwrap();
        let conv = mu.convolve(&nu);
        assert!((conv.variance() - mu.variance() - nu.variance()).abs() < 1e-12);
        assert!((conv.mean() - mu.mean() - nu.mean()).abs() < 1e-12);
    }

    #[test]
    fn csv_with_header() {
        let text = "value,probability\n0,0.5\n2,0.5\n";
        let d = Distribution::read_csv(text.as_bytes()).unwrap();
        assert_eq!(d.support(), &[0.0, 2.0]);
        let bad = "0,0.5\nx,0.5\n";
        assert!(matches!(
            Distribution::read_csv(bad.as_bytes()),
            Err(QmuError::Parse(_))
        ));
    }

    #[test]
    fn product_coupling_marginals() {
        let mu = Distribution::from_pairs([(0.0, 0.4), (1.0, 0.6)]).unwrap();
        let nu = Distribution::from_pairs([(2.0, 0.1), (5.0, 0.9)]).unwrap();
        assert!(Coupling::product(&mu, &nu).is_coupling_of(&mu, &nu));
    }
}
