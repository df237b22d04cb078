//! Coefficient-of-variation cluster purity.
//!
//! Each cluster's label distribution is the vector of its per-label counts
//! over all `l` subset labels, zeros included. Its CV is σ/μ. The
//! size-weighted mean of the cluster CVs is divided by the largest value it
//! can take, the CV of `(1, 0, …, 0)`, so purity is 1 exactly when every
//! cluster holds a single label and 0 when every cluster is uniformly mixed.
//!
//! With counts summing to `S` and squares summing to `Q`, the population CV
//! is `sqrt((l·Q − S²) / S²)`. Evaluating it from integer sums makes pure
//! clusters land exactly on the theoretical maximum `sqrt(l − 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Dataset, LabelSubset};
use crate::wsi::ClusteringSolution;

/// Which standard deviation enters the CV.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Sigma {
    /// Divide by `l`.
    #[default]
    Population,
    /// Divide by `l − 1`.
    Sample,
}

/// Per-label counts of one cluster, one entry per subset label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDistribution {
    pub counts: Vec<u64>,
}

impl LabelDistribution {
    pub fn new(counts: Vec<u64>) -> Self {
        LabelDistribution { counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Squared CV as an exact integer ratio `num / den`.
fn cv_squared_parts(counts: &[u64], sigma: Sigma) -> (u128, u128) {
    let l = counts.len() as u128;
    let s: u128 = counts.iter().map(|&c| c as u128).sum();
    let q: u128 = counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
    let num = l * q - s * s;
    match sigma {
        Sigma::Population => (num, s * s),
        Sigma::Sample => (l * num, (l - 1) * s * s),
    }
}

pub fn cluster_cv(dist: &LabelDistribution, sigma: Sigma) -> Result<f64> {
    let l = dist.counts.len();
    if l < 2 {
        return Err(Error::InvalidParameter(format!(
            "CV needs at least two labels, got {l}"
        )));
    }
    if dist.total() == 0 {
        return Err(Error::EmptyInput("all-zero label distribution"));
    }
    let (num, den) = cv_squared_parts(&dist.counts, sigma);
    Ok((num as f64 / den as f64).sqrt())
}

/// CV of `(1, 0^{l−1})`: `sqrt(l − 1)` for the population convention,
/// `sqrt(l)` for the sample one.
pub fn theoretical_max(l: usize, sigma: Sigma) -> Result<f64> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!(
            "theoretical maximum needs at least two labels, got {l}"
        )));
    }
    Ok(match sigma {
        Sigma::Population => ((l - 1) as f64).sqrt(),
        Sigma::Sample => (l as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub labels: Vec<String>,
    pub sigma: Sigma,
    /// Per cluster, per label counts.
    pub distributions: Vec<Vec<u64>>,
    pub per_cluster_cv: Vec<f64>,
    pub weights: Vec<f64>,
    pub wa_cv: f64,
    pub tm: f64,
    pub purity: f64,
    pub permutation: String,
}

/// `(cvs, weights, wa_cv, tm, purity)`.
pub type PurityParts = (Vec<f64>, Vec<f64>, f64, f64, f64);

/// Purity of a set of cluster distributions sharing one label axis.
pub fn purity_of_distributions(dists: &[LabelDistribution], sigma: Sigma) -> Result<PurityParts> {
    let l = dists
        .first()
        .ok_or(Error::EmptyInput("no clusters"))?
        .counts
        .len();
    let tm = theoretical_max(l, sigma)?;
    let mut sizes = Vec::with_capacity(dists.len());
    let mut cvs = Vec::with_capacity(dists.len());
    for (i, d) in dists.iter().enumerate() {
        if d.counts.len() != l {
            return Err(Error::DimensionConflict {
                left: l,
                right: d.counts.len(),
            });
        }
        if d.total() == 0 {
            return Err(Error::EmptyCluster(i));
        }
        sizes.push(d.total());
        cvs.push(cluster_cv(d, sigma)?);
    }
    let n: u64 = sizes.iter().sum();
    let n = n as f64;
    let weights: Vec<f64> = sizes.iter().map(|&s| s as f64 / n).collect();
    let wa_cv = sizes
        .iter()
        .zip(&cvs)
        .map(|(&s, cv)| s as f64 * cv)
        .sum::<f64>()
        / n;
    // Summing size · (CV / TM) keeps pure solutions at exactly 1.
    let purity = sizes
        .iter()
        .zip(&cvs)
        .map(|(&s, cv)| s as f64 * (cv / tm))
        .sum::<f64>()
        / n;
    Ok((cvs, weights, wa_cv, tm, purity))
}

/// Per-cluster label distributions of a solution over `subset`.
pub fn distributions(
    solution: &ClusteringSolution,
    records: &Dataset,
    subset: &LabelSubset,
) -> Result<Vec<LabelDistribution>> {
    let mut counts = vec![vec![0u64; subset.k]; solution.k];
    for r in records.records() {
        let label = r
            .label
            .as_deref()
            .and_then(|l| subset.index_of(l))
            .ok_or_else(|| Error::UnexpectedLabel {
                id: r.occurrence_id.clone(),
            })?;
        let cluster = solution
            .cluster_of(&r.occurrence_id)
            .filter(|&c| c < solution.k)
            .ok_or_else(|| Error::Unassigned(r.occurrence_id.clone()))?;
        counts[cluster][label] += 1;
    }
    Ok(counts.into_iter().map(LabelDistribution::new).collect())
}

pub fn purity_score(
    solution: &ClusteringSolution,
    records: &Dataset,
    subset: &LabelSubset,
    sigma: Sigma,
) -> Result<PurityReport> {
    let dists = distributions(solution, records, subset)?;
    let (per_cluster_cv, weights, wa_cv, tm, purity) = purity_of_distributions(&dists, sigma)?;

    let sizes: Vec<usize> = dists.iter().map(|d| d.total() as usize).collect();
    let permutation = crate::wsi::profile::size_order(&sizes)
        .into_iter()
        .map(|c| {
            // Ties among counts go to the better-ranked (earlier) label.
            let counts = &dists[c].counts;
            let best = (0..counts.len())
                .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
                .expect("at least two labels");
            (best + 1).to_string()
        })
        .collect();

    Ok(PurityReport {
        labels: subset.labels.clone(),
        sigma,
        distributions: dists.into_iter().map(|d| d.counts).collect(),
        per_cluster_cv,
        weights,
        wa_cv,
        tm,
        purity,
        permutation,
    })
}
