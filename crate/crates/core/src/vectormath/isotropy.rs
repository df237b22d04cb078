//! Global isotropy probe: average cosine similarity over random disjoint pairs.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cosine;
use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::rng;

pub const HISTOGRAM_BINS: usize = 200;

/// Mean cosine of the sampled pairs and their density over `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilaritySummary {
    pub mean: f64,
    pub n_pairs: usize,
    /// `HISTOGRAM_BINS + 1` bin edges.
    pub bins: Vec<f64>,
    pub counts: Vec<u64>,
    /// Set when the pool was smaller than the requested token count and
    /// tokens were drawn with replacement.
    #[serde(default)]
    pub with_replacement: bool,
}

impl SimilaritySummary {
    pub fn from_values(values: &[f64], with_replacement: bool) -> Self {
        let bins = (0..=HISTOGRAM_BINS)
            .map(|i| -1.0 + 2.0 * i as f64 / HISTOGRAM_BINS as f64)
            .collect();
        let mut counts = vec![0u64; HISTOGRAM_BINS];
        for &v in values {
            counts[bin_of(v)] += 1;
        }
        let mean = if values.is_empty() {
            0.0
        } else {
            (values.iter().sum::<f64>() / values.len() as f64).clamp(-1.0, 1.0)
        };
        SimilaritySummary {
            mean,
            n_pairs: values.len(),
            bins,
            counts,
            with_replacement,
        }
    }
}

fn bin_of(v: f64) -> usize {
    let scaled = ((v + 1.0) * (HISTOGRAM_BINS as f64 / 2.0)).floor();
    (scaled.max(0.0) as usize).min(HISTOGRAM_BINS - 1)
}

/// Samples `n_tokens` of `vectors`, shuffles them, and takes the first
/// `n_pairs` consecutive disjoint pairs.
pub fn acs_vectors(
    vectors: &[&[f32]],
    n_tokens: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<SimilaritySummary> {
    if vectors.len() < 2 {
        return Err(Error::EmptyInput(
            "isotropy probe needs at least two vectors",
        ));
    }
    if n_tokens < 2 || !n_tokens.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "token count must be even and at least 2, got {n_tokens}"
        )));
    }
    if n_pairs == 0 || n_pairs > n_tokens / 2 {
        return Err(Error::InvalidParameter(format!(
            "pair count must lie in 1..={}, got {n_pairs}",
            n_tokens / 2
        )));
    }

    let mut rng = rng::stream(seed, "isotropy-sampling", 0);
    let with_replacement = vectors.len() < n_tokens;
    let mut pool: Vec<usize> = if with_replacement {
        (0..n_tokens)
            .map(|_| rng.random_range(0..vectors.len()))
            .collect()
    } else {
        rand::seq::index::sample(&mut rng, vectors.len(), n_tokens).into_vec()
    };
    pool.shuffle(&mut rng);

    let values = pool[..2 * n_pairs]
        .par_chunks_exact(2)
        .map(|pair| cosine(vectors[pair[0]], vectors[pair[1]]))
        .collect::<Result<Vec<f64>>>()?;
    Ok(SimilaritySummary::from_values(&values, with_replacement))
}

/// Average cosine similarity over random record pairs of a dataset.
pub fn acs_isotropy(
    dataset: &Dataset,
    n_tokens: usize,
    n_pairs: usize,
    seed: u64,
) -> Result<SimilaritySummary> {
    let vectors: Vec<&[f32]> = dataset.vectors().collect();
    acs_vectors(&vectors, n_tokens, n_pairs, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_cover_the_closed_interval() {
        assert_eq!(bin_of(-1.0), 0);
        assert_eq!(bin_of(1.0), HISTOGRAM_BINS - 1);
        assert_eq!(bin_of(0.0), HISTOGRAM_BINS / 2);
        assert_eq!(bin_of(-0.999), 0);
        assert_eq!(bin_of(-0.989), 1);
    }

    #[test]
    fn duplicated_vector_gives_one() {
        let v = [0.25f32, -0.5, 3.0];
        let pool = vec![&v[..]; 10];
        let s = acs_vectors(&pool, 20, 10, 3).unwrap();
        assert!(s.with_replacement);
        assert_eq!(s.mean, 1.0);
        assert_eq!(s.counts[HISTOGRAM_BINS - 1], 10);
        assert_eq!(s.counts.iter().sum::<u64>(), 10);
    }

    #[test]
    fn parameter_checks() {
        let v = [1.0f32];
        assert!(acs_vectors(&[&v[..]], 2, 1, 0).is_err());
        let pool = vec![&v[..]; 4];
        assert!(acs_vectors(&pool, 3, 1, 0).is_err());
        assert!(acs_vectors(&pool, 4, 3, 0).is_err());
        assert!(acs_vectors(&pool, 4, 0, 0).is_err());
        assert!(!acs_vectors(&pool, 4, 2, 0).unwrap().with_replacement);
    }
}
