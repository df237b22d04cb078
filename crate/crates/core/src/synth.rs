//! Synthetic embedding datasets with known structure.
//!
//! Used to build the bundled fixtures and to exercise the analyses where the
//! right answer is known by construction.

use std::ops::RangeInclusive;

use rand::seq::IndexedRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::ingest::{Dataset, EmbeddingRecord};
use crate::rng;

/// Isotropic Gaussian clusters, one per label.
#[derive(Debug, Clone)]
pub struct BlobSpec {
    /// Label name and record count.
    pub labels: Vec<(String, usize)>,
    pub dim: usize,
    /// Euclidean distance between any two cluster centres.
    pub separation: f64,
    /// Per-component standard deviation.
    pub sigma: f64,
    pub seed: u64,
    /// Years assigned uniformly at random, if any.
    pub years: Option<RangeInclusive<i32>>,
    /// Attach context tokens drawn from a per-label vocabulary.
    pub context: bool,
}

impl BlobSpec {
    pub fn balanced(
        n_labels: usize,
        per_label: usize,
        dim: usize,
        separation: f64,
        seed: u64,
    ) -> Self {
        BlobSpec {
            labels: (1..=n_labels)
                .map(|i| (format!("S{i}"), per_label))
                .collect(),
            dim,
            separation,
            sigma: 1.0,
            seed,
            years: None,
            context: false,
        }
    }
}

const SHARED_WORDS: &[&str] = &["the", "of", "data", "using", "we", "model", "in", "results"];

fn label_vocab(label_index: usize) -> Vec<String> {
    (0..4).map(|j| format!("w{label_index}x{j}")).collect()
}

/// Centre `i` sits at `separation / √2 · e_i`, so all pairwise centre
/// distances equal `separation`. Requires `dim` ≥ number of labels.
pub fn blobs(spec: &BlobSpec) -> Result<Dataset> {
    assert!(spec.dim >= spec.labels.len(), "one axis per label");
    let mut rng = rng::stream(spec.seed, "synth-blobs", 0);
    let offset = spec.separation / std::f64::consts::SQRT_2;
    let mut records = Vec::new();
    for (li, (label, n)) in spec.labels.iter().enumerate() {
        let vocab = label_vocab(li);
        for i in 0..*n {
            let vector: Vec<f32> = (0..spec.dim)
                .map(|d| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let centre = if d == li { offset } else { 0.0 };
                    (centre + spec.sigma * z) as f32
                })
                .collect();
            let year = spec.years.as_ref().map(|r| rng.random_range(r.clone()));
            let context_tokens = spec.context.then(|| {
                (0..8)
                    .map(|_| {
                        if rng.random_bool(0.5) {
                            vocab.choose(&mut rng).unwrap().clone()
                        } else {
                            SHARED_WORDS.choose(&mut rng).unwrap().to_string()
                        }
                    })
                    .collect()
            });
            records.push(EmbeddingRecord {
                occurrence_id: format!("{label}-{i:05}"),
                term: "Planck".into(),
                vector,
                corpus_id: "synthetic".into(),
                paragraph_id: format!("para-{li}-{i:05}"),
                year,
                label: Some(label.clone()),
                context_tokens,
            });
        }
    }
    Dataset::new(records, format!("synthetic:blobs:{}", spec.seed))
}

/// `n` vectors drawn uniformly on the unit sphere, stored row-major.
pub fn uniform_sphere(n: usize, dim: usize, seed: u64) -> Vec<f32> {
    let mut rng = rng::stream(seed, "synth-sphere", 0);
    let mut out = Vec::with_capacity(n * dim);
    let mut row = vec![0f64; dim];
    for _ in 0..n {
        for x in row.iter_mut() {
            *x = StandardNormal.sample(&mut rng);
        }
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.extend(row.iter().map(|x| (x / norm) as f32));
    }
    out
}

/// Unlabeled yearly stream drawn from two well-separated senses. Before
/// `switch_year` each year holds `per_year` occurrences split by
/// `share_before` (fraction of sense A); from `switch_year` on, by
/// `share_after`. Counts per year are exact, only the vectors are random.
#[derive(Debug, Clone)]
pub struct StreamSpec {
    pub years: RangeInclusive<i32>,
    pub switch_year: i32,
    pub per_year: usize,
    pub share_before: f64,
    pub share_after: f64,
    pub dim: usize,
    pub separation: f64,
    pub sigma: f64,
    pub seed: u64,
}

pub fn sense_stream(spec: &StreamSpec) -> Result<Dataset> {
    assert!(spec.dim >= 2);
    let mut rng = rng::stream(spec.seed, "synth-stream", 0);
    let offset = spec.separation / std::f64::consts::SQRT_2;
    let mut records = Vec::new();
    for year in spec.years.clone() {
        let share = if year < spec.switch_year {
            spec.share_before
        } else {
            spec.share_after
        };
        let n_a = (share * spec.per_year as f64).round() as usize;
        for i in 0..spec.per_year {
            let sense = usize::from(i >= n_a);
            let vector = (0..spec.dim)
                .map(|d| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let centre = if d == sense { offset } else { 0.0 };
                    (centre + spec.sigma * z) as f32
                })
                .collect();
            records.push(EmbeddingRecord {
                occurrence_id: format!("{year}-{i:05}"),
                term: "Planck".into(),
                vector,
                corpus_id: "synthetic-stream".into(),
                paragraph_id: format!("{year}-p{i:05}"),
                year: Some(year),
                label: None,
                context_tokens: None,
            });
        }
    }
    Dataset::new(records, format!("synthetic:stream:{}", spec.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectormath::{norm_sq, squared_distance};

    #[test]
    fn blob_centres_are_separated() {
        let ds = blobs(&BlobSpec {
            sigma: 0.0,
            ..BlobSpec::balanced(3, 2, 4, 10.0, 1)
        })
        .unwrap();
        let a = &ds.records()[0].vector;
        let b = &ds.records()[2].vector;
        assert!((squared_distance(a, b) - 100.0).abs() < 1e-4);
    }

    #[test]
    fn sphere_rows_are_unit() {
        let v = uniform_sphere(10, 8, 3);
        for row in v.chunks(8) {
            assert!((norm_sq(row) - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn stream_counts_are_exact() {
        let ds = sense_stream(&StreamSpec {
            years: 2000..=2003,
            switch_year: 2002,
            per_year: 10,
            share_before: 0.8,
            share_after: 0.3,
            dim: 4,
            separation: 10.0,
            sigma: 0.5,
            seed: 0,
        })
        .unwrap();
        assert_eq!(ds.len(), 40);
        let near_a = |r: &EmbeddingRecord| r.vector[0] > r.vector[1];
        let in_year = |y| ds.records().iter().filter(move |r| r.year == Some(y));
        assert_eq!(in_year(2001).filter(|r| near_a(r)).count(), 8);
        assert_eq!(in_year(2003).filter(|r| near_a(r)).count(), 3);
    }
}
