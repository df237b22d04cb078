//! Unsupervised sense induction: K-means with restarts, cluster profiles and
//! the cohesion/separation heatmap.

pub mod kmeans;
pub mod profile;

use serde::{Deserialize, Serialize};

pub use kmeans::{best_of, kmeans, BestOf, ClusteringSolution, Init, KMeansParams, RestartSummary};
pub use profile::{
    heatmap_data, permutation_string, profile_clusters, ClusterProfile, Heatmap, NeighborWord,
};

use crate::error::Result;
use crate::ingest::{Dataset, LabelRanking};
use crate::stopwords::StopWords;

/// Best-of-N clustering together with everything derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductionReport {
    pub solution: ClusteringSolution,
    pub restarts: Vec<RestartSummary>,
    pub profiles: Vec<ClusterProfile>,
    pub permutation: String,
    pub heatmap: Heatmap,
    pub stopwords_sha256: String,
}

/// Clusters `records` and profiles the winning solution. Dominant-label
/// ranks come from the labels present in `records`.
pub fn induce(
    records: &Dataset,
    k: usize,
    n_restarts: usize,
    base_seed: u64,
    params: &KMeansParams,
    stopwords: &StopWords,
) -> Result<InductionReport> {
    let BestOf { solution, restarts } = best_of(records, k, n_restarts, base_seed, params)?;
    let ranking = LabelRanking::from_dataset(records);
    let ranking = (!ranking.is_empty()).then_some(&ranking);
    let profiles = profile_clusters(&solution, records, ranking, stopwords)?;
    let heatmap = heatmap_data(&solution, records)?;
    Ok(InductionReport {
        permutation: permutation_string(&profiles),
        solution,
        restarts,
        profiles,
        heatmap,
        stopwords_sha256: stopwords.sha256().to_string(),
    })
}
