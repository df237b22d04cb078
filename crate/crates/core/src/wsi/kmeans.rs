//! Lloyd's K-means with seeded restarts.
//!
//! Distances are squared Euclidean on the raw embeddings. Assignment runs in
//! parallel over points; centroid sums reduce over fixed-size chunks in
//! chunk order, so a given seed yields the same solution on any thread count.

use indexmap::IndexMap;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::rng;
use crate::vectormath::squared_distance;

const CHUNK: usize = 1024;

/// Centroid initialization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Init {
    /// k distinct records drawn uniformly.
    #[default]
    Forgy,
    /// D²-weighted seeding.
    KmeansPlusPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansParams {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
    pub init: Init,
}

impl Default for KMeansParams {
    fn default() -> Self {
        KMeansParams {
            max_iter: 300,
            tol: 1e-6,
            init: Init::Forgy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringSolution {
    pub k: usize,
    pub seed: u64,
    pub centroids: Vec<Vec<f64>>,
    /// Cluster index per occurrence id, in dataset order.
    pub assignment: IndexMap<String, usize>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Inertia after every assignment step, starting with the initial one.
    pub inertia_trace: Vec<f64>,
    pub params: KMeansParams,
}

impl ClusteringSolution {
    pub fn cluster_of(&self, occurrence_id: &str) -> Option<usize> {
        self.assignment.get(occurrence_id).copied()
    }

    /// Record positions of `records` grouped by cluster.
    pub fn members(&self, records: &Dataset) -> Result<Vec<Vec<usize>>> {
        let mut members = vec![Vec::new(); self.k];
        for (pos, r) in records.records().iter().enumerate() {
            let c = self
                .cluster_of(&r.occurrence_id)
                .filter(|&c| c < self.k)
                .ok_or_else(|| Error::Unassigned(r.occurrence_id.clone()))?;
            members[c].push(pos);
        }
        Ok(members)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in self.assignment.values() {
            if c < self.k {
                sizes[c] += 1;
            }
        }
        sizes
    }
}

/// Outcome of one Lloyd run over bare points.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
    pub inertia_trace: Vec<f64>,
}

fn assign(points: &[&[f32]], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>) {
    points
        .par_iter()
        .map(|p| {
            let mut best = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = squared_distance(p, centroid);
                if d < best.1 {
                    best = (c, d);
                }
            }
            best
        })
        .unzip()
}

fn total(dists: &[f64]) -> f64 {
    dists.iter().sum()
}

fn means(points: &[&[f32]], labels: &[usize], k: usize, dim: usize) -> Vec<Vec<f64>> {
    let partials: Vec<(Vec<Vec<f64>>, Vec<usize>)> = points
        .par_chunks(CHUNK)
        .zip(labels.par_chunks(CHUNK))
        .map(|(ps, ls)| {
            let mut sums = vec![vec![0.0; dim]; k];
            let mut counts = vec![0usize; k];
            for (p, &l) in ps.iter().zip(ls) {
                counts[l] += 1;
                for (s, &x) in sums[l].iter_mut().zip(p.iter()) {
                    *s += x as f64;
                }
            }
            (sums, counts)
        })
        .collect();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (ps, pc) in partials {
        for c in 0..k {
            counts[c] += pc[c];
            for (s, x) in sums[c].iter_mut().zip(&ps[c]) {
                *s += x;
            }
        }
    }
    for (s, &n) in sums.iter_mut().zip(&counts) {
        if n > 0 {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
    }
    sums
}

/// Moves the point farthest from its centroid into each empty cluster. Only
/// clusters with two or more members donate. Returns whether anything moved.
fn repair_empty(labels: &mut [usize], dists: &mut [f64], k: usize) -> bool {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut repaired = false;
    while let Some(empty) = sizes.iter().position(|&s| s == 0) {
        let mut donor: Option<usize> = None;
        for i in 0..labels.len() {
            if sizes[labels[i]] >= 2 && donor.is_none_or(|d| dists[i] > dists[d]) {
                donor = Some(i);
            }
        }
        let Some(p) = donor else { break };
        sizes[labels[p]] -= 1;
        sizes[empty] += 1;
        labels[p] = empty;
        dists[p] = 0.0;
        repaired = true;
    }
    repaired
}

fn init_centroids(points: &[&[f32]], k: usize, init: Init, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let to_f64 = |p: &[f32]| p.iter().map(|&x| x as f64).collect::<Vec<f64>>();
    match init {
        Init::Forgy => rand::seq::index::sample(rng, points.len(), k)
            .into_iter()
            .map(|i| to_f64(points[i]))
            .collect(),
        Init::KmeansPlusPlus => {
            let mut centroids = vec![to_f64(points[rng.random_range(0..points.len())])];
            let mut d2: Vec<f64> = points
                .iter()
                .map(|p| squared_distance(p, &centroids[0]))
                .collect();
            while centroids.len() < k {
                let next = match WeightedIndex::new(&d2) {
                    Ok(w) => w.sample(rng),
                    // every point coincides with a centroid
                    Err(_) => rng.random_range(0..points.len()),
                };
                let c = to_f64(points[next]);
                for (d, p) in d2.iter_mut().zip(points) {
                    *d = d.min(squared_distance(p, &c));
                }
                centroids.push(c);
            }
            centroids
        }
    }
}

/// One seeded Lloyd run over bare points.
pub fn lloyd(points: &[&[f32]], k: usize, seed: u64, params: &KMeansParams) -> Result<LloydRun> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 2, got {k}"
        )));
    }
    if k > points.len() {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the {} available records",
            points.len()
        )));
    }
    let dim = points[0].len();
    let mut rng = rng::stream(seed, "kmeans-init", 0);
    let mut centroids = init_centroids(points, k, params.init, &mut rng);
    let (mut labels, mut dists) = assign(points, &centroids);
    let mut trace = vec![total(&dists)];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iter {
        let repaired = repair_empty(&mut labels, &mut dists, k);
        let updated = means(points, &labels, k, dim);
        let shift = updated
            .iter()
            .zip(&centroids)
            .map(|(a, b)| squared_distance(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        let (next_labels, next_dists) = assign(points, &centroids);
        iterations += 1;
        trace.push(total(&next_dists));
        let stable = !repaired && next_labels == labels;
        labels = next_labels;
        dists = next_dists;
        if stable || (shift < params.tol && !has_empty(&labels, k)) {
            converged = true;
            break;
        }
    }

    let mut inertia = *trace.last().expect("trace starts non-empty");
    if repair_empty(&mut labels, &mut dists, k) {
        // Iteration budget ran out with an empty cluster.
        centroids = means(points, &labels, k, dim);
        inertia = points
            .iter()
            .zip(&labels)
            .map(|(p, &l)| squared_distance(p, &centroids[l]))
            .sum();
    }
    Ok(LloydRun {
        centroids,
        labels,
        inertia,
        iterations,
        converged,
        inertia_trace: trace,
    })
}

fn has_empty(labels: &[usize], k: usize) -> bool {
    let mut seen = vec![false; k];
    labels.iter().for_each(|&l| seen[l] = true);
    seen.contains(&false)
}

fn solution_from_run(
    records: &Dataset,
    k: usize,
    seed: u64,
    params: &KMeansParams,
    run: LloydRun,
) -> ClusteringSolution {
    let assignment = records
        .records()
        .iter()
        .zip(&run.labels)
        .map(|(r, &l)| (r.occurrence_id.clone(), l))
        .collect();
    ClusteringSolution {
        k,
        seed,
        centroids: run.centroids,
        assignment,
        inertia: run.inertia,
        iterations: run.iterations,
        converged: run.converged,
        inertia_trace: run.inertia_trace,
        params: *params,
    }
}

pub fn kmeans(
    records: &Dataset,
    k: usize,
    seed: u64,
    params: &KMeansParams,
) -> Result<ClusteringSolution> {
    let points: Vec<&[f32]> = records.vectors().collect();
    let run = lloyd(&points, k, seed, params)?;
    Ok(solution_from_run(records, k, seed, params, run))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub seed: u64,
    pub inertia: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimum-inertia solution over consecutive seeds, with every restart's
/// outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestOf {
    pub solution: ClusteringSolution,
    pub restarts: Vec<RestartSummary>,
}

/// Runs restarts with seeds `base_seed .. base_seed + n_restarts` over bare
/// points. Returns the winning seed, its run, and all summaries in seed order.
pub fn best_of_points(
    points: &[&[f32]],
    k: usize,
    n_restarts: usize,
    base_seed: u64,
    params: &KMeansParams,
) -> Result<(u64, LloydRun, Vec<RestartSummary>)> {
    if n_restarts == 0 {
        return Err(Error::InvalidParameter(
            "at least one restart is required".into(),
        ));
    }
    type Acc = (Option<(u64, LloydRun)>, Vec<RestartSummary>);
    let better = |a: &(u64, LloydRun), b: &(u64, LloydRun)| {
        a.1.inertia
            .total_cmp(&b.1.inertia)
            .then(a.0.cmp(&b.0))
            .is_le()
    };
    let (best, mut summaries) = (0..n_restarts as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let run = lloyd(points, k, seed, params)?;
            let summary = RestartSummary {
                seed,
                inertia: run.inertia,
                iterations: run.iterations,
                converged: run.converged,
            };
            Ok::<Acc, Error>((Some((seed, run)), vec![summary]))
        })
        .try_reduce(
            || (None, Vec::new()),
            |(a, mut sa), (b, sb)| {
                sa.extend(sb);
                let best = match (a, b) {
                    (Some(a), Some(b)) => Some(if better(&a, &b) { a } else { b }),
                    (a, b) => a.or(b),
                };
                Ok((best, sa))
            },
        )?;
    summaries.sort_by_key(|s| s.seed);
    let (seed, run) = best.expect("at least one restart ran");
    Ok((seed, run, summaries))
}

pub fn best_of(
    records: &Dataset,
    k: usize,
    n_restarts: usize,
    base_seed: u64,
    params: &KMeansParams,
) -> Result<BestOf> {
    let points: Vec<&[f32]> = records.vectors().collect();
    let (seed, run, restarts) = best_of_points(&points, k, n_restarts, base_seed, params)?;
    Ok(BestOf {
        solution: solution_from_run(records, k, seed, params, run),
        restarts,
    })
}
