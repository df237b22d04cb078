//! Cluster profiles, dominant-label permutation strings and the
//! cohesion/separation heatmap.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::kmeans::ClusteringSolution;
use crate::error::{Error, Result};
use crate::ingest::{Dataset, LabelRanking};
use crate::stopwords::StopWords;
use crate::vectormath::{Ais, UnitSum};

pub const TOP_NEIGHBORS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborWord {
    pub word: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster: usize,
    pub size: usize,
    pub dominant_label: Option<String>,
    /// Corpus frequency rank of the dominant label.
    pub dominant_rank: Option<usize>,
    pub top_neighbors: Vec<NeighborWord>,
    pub ais: Ais,
}

/// Order of clusters by size, largest first; ties by cluster index.
pub fn size_order(sizes: &[usize]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(a.cmp(&b)));
    order
}

/// Most frequent label, ties to the better corpus rank and then
/// lexicographically.
pub fn dominant_label<'a>(
    labels: impl IntoIterator<Item = &'a str>,
    ranking: Option<&LabelRanking>,
) -> Option<&'a str> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for l in labels {
        *counts.entry(l).or_default() += 1;
    }
    let rank = |l: &str| ranking.and_then(|r| r.rank_of(l)).unwrap_or(usize::MAX);
    counts
        .into_iter()
        .min_by(|a, b| {
            b.1.cmp(&a.1)
                .then(rank(a.0).cmp(&rank(b.0)))
                .then(a.0.cmp(b.0))
        })
        .map(|(l, _)| l)
}

/// Most frequent context words, stop words and the target term excluded.
pub fn top_neighbors<'a>(
    records: impl IntoIterator<Item = &'a crate::ingest::EmbeddingRecord>,
    stopwords: &StopWords,
    n: usize,
) -> Vec<NeighborWord> {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut terms: Vec<String> = Vec::new();
    let records: Vec<_> = records.into_iter().collect();
    for r in &records {
        let term = r.term.to_lowercase();
        if !terms.contains(&term) {
            terms.push(term);
        }
    }
    for r in &records {
        for tok in r.context_tokens.iter().flatten() {
            if stopwords.contains(tok) || terms.iter().any(|t| t == tok) {
                continue;
            }
            *counts.entry(tok.as_str()).or_default() += 1;
        }
    }
    let mut words: Vec<(&str, usize)> = counts.into_iter().collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    words
        .into_iter()
        .take(n)
        .map(|(w, c)| NeighborWord {
            word: w.to_string(),
            count: c,
        })
        .collect()
}

/// Profiles in cluster-index order.
pub fn profile_clusters(
    solution: &ClusteringSolution,
    records: &Dataset,
    ranking: Option<&LabelRanking>,
    stopwords: &StopWords,
) -> Result<Vec<ClusterProfile>> {
    let members = solution.members(records)?;
    let rs = records.records();
    members
        .iter()
        .enumerate()
        .map(|(cluster, idx)| {
            let dominant =
                dominant_label(idx.iter().filter_map(|&i| rs[i].label.as_deref()), ranking);
            let ais = if idx.is_empty() {
                Ais::InsufficientMembers
            } else {
                UnitSum::new(idx.iter().map(|&i| rs[i].vector.as_slice()))?.inner_similarity()
            };
            Ok(ClusterProfile {
                cluster,
                size: idx.len(),
                dominant_label: dominant.map(String::from),
                dominant_rank: dominant.and_then(|d| ranking.and_then(|r| r.rank_of(d))),
                top_neighbors: top_neighbors(idx.iter().map(|&i| &rs[i]), stopwords, TOP_NEIGHBORS),
                ais,
            })
        })
        .collect()
}

/// Dominant-label ranks of the clusters from largest to smallest, e.g.
/// `"1243"`. A cluster without a ranked dominant label contributes `?`.
pub fn permutation_string(profiles: &[ClusterProfile]) -> String {
    let sizes: Vec<usize> = profiles.iter().map(|p| p.size).collect();
    size_order(&sizes)
        .into_iter()
        .map(|i| match profiles[i].dominant_rank {
            Some(r) => r.to_string(),
            None => "?".to_string(),
        })
        .collect()
}

/// Cohesion (diagonal AIS) and separation (off-diagonal APS) between
/// clusters, ordered largest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Heatmap {
    /// Cluster index of each row/column.
    pub order: Vec<usize>,
    pub sizes: Vec<usize>,
    /// `None` only on the diagonal of singleton clusters.
    pub matrix: Vec<Vec<Option<f64>>>,
    /// Rows whose diagonal is undefined and excluded from the summary.
    pub flagged: Vec<usize>,
    /// Mean over clusters of AIS minus the cluster's mean APS to the others.
    pub ais_minus_aps: Option<f64>,
}

impl Heatmap {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cluster");
        for c in &self.order {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for (row, c) in self.matrix.iter().zip(&self.order) {
            out.push_str(&c.to_string());
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}

pub fn heatmap_data(solution: &ClusteringSolution, records: &Dataset) -> Result<Heatmap> {
    if solution.k < 2 {
        return Err(Error::InvalidParameter(
            "heatmap needs at least two clusters".into(),
        ));
    }
    let members = solution.members(records)?;
    let rs = records.records();
    let sizes: Vec<usize> = members.iter().map(Vec::len).collect();
    let order = size_order(&sizes);
    let sums = order
        .iter()
        .map(|&c| {
            if members[c].is_empty() {
                return Err(Error::EmptyCluster(c));
            }
            UnitSum::new(members[c].iter().map(|&i| rs[i].vector.as_slice()))
        })
        .collect::<Result<Vec<_>>>()?;

    let k = order.len();
    let mut matrix = vec![vec![None; k]; k];
    let mut flagged = Vec::new();
    for i in 0..k {
        matrix[i][i] = sums[i].inner_similarity().score();
        if matrix[i][i].is_none() {
            flagged.push(i);
        }
        for j in i + 1..k {
            let v = sums[i].cross_similarity(&sums[j])?;
            matrix[i][j] = Some(v);
            matrix[j][i] = Some(v);
        }
    }

    let diffs: Vec<f64> = (0..k)
        .filter_map(|i| {
            let own = matrix[i][i]?;
            let others: f64 = (0..k)
                .filter(|&j| j != i)
                .filter_map(|j| matrix[i][j])
                .sum();
            Some(own - others / (k - 1) as f64)
        })
        .collect();
    let ais_minus_aps = (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64);

    Ok(Heatmap {
        sizes: order.iter().map(|&c| sizes[c]).collect(),
        order,
        matrix,
        flagged,
        ais_minus_aps,
    })
}
