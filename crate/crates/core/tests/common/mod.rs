//! Independent reference implementations shared by the test targets. Nothing
//! here calls into the library's numerics; the oracles use plain f64 loops.
#![allow(dead_code)]

use cwe_senses::wsi::{ClusteringSolution, KMeansParams};
use cwe_senses::{Dataset, EmbeddingRecord};
use indexmap::IndexMap;

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn record(
    i: usize,
    vector: Vec<f32>,
    label: Option<&str>,
    year: Option<i32>,
) -> EmbeddingRecord {
    EmbeddingRecord {
        occurrence_id: format!("r{i:04}"),
        term: "Planck".into(),
        vector,
        corpus_id: "test".into(),
        paragraph_id: format!("p{i:04}"),
        year,
        label: label.map(str::to_string),
        context_tokens: None,
    }
}

/// Dataset of unlabeled, undated points.
pub fn points_dataset(points: &[Vec<f32>]) -> Dataset {
    let records = points
        .iter()
        .enumerate()
        .map(|(i, p)| record(i, p.clone(), None, None))
        .collect();
    Dataset::new(records, "test").unwrap()
}

/// A solution that assigns record `i` of `ds` to `labels[i]`.
pub fn solution_for(ds: &Dataset, labels: &[usize], k: usize) -> ClusteringSolution {
    let assignment: IndexMap<String, usize> = ds
        .records()
        .iter()
        .zip(labels)
        .map(|(r, &c)| (r.occurrence_id.clone(), c))
        .collect();
    ClusteringSolution {
        k,
        seed: 0,
        centroids: vec![vec![0.0; ds.dim()]; k],
        assignment,
        inertia: 0.0,
        iterations: 0,
        converged: true,
        inertia_trace: vec![],
        params: KMeansParams::default(),
    }
}

/// Calls `f` with every assignment of `n` items to exactly `k` nonempty
/// blocks, each partition visited once (restricted growth strings).
pub fn for_each_partition(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(a: &mut Vec<usize>, n: usize, k: usize, max: usize, f: &mut impl FnMut(&[usize])) {
        if a.len() == n {
            if max + 1 == k {
                f(a);
            }
            return;
        }
        // Not enough items left to open the remaining blocks.
        if k - (max + 1) > n - a.len() {
            return;
        }
        for c in 0..=(max + 1).min(k - 1) {
            a.push(c);
            go(a, n, k, max.max(c), f);
            a.pop();
        }
    }
    if n == 0 || k == 0 || k > n {
        return;
    }
    let mut a = vec![0];
    go(&mut a, n, k, 0, f);
}

/// Coefficient of variation with the population σ, by the textbook two-pass
/// formula.
pub fn cv_oracle(counts: &[u64]) -> f64 {
    let l = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / l;
    let var = counts
        .iter()
        .map(|&c| (c as f64 - mean).powi(2))
        .sum::<f64>()
        / l;
    var.sqrt() / mean
}

/// Weighted-average CV divided by the CV of a one-hot distribution.
pub fn purity_oracle(clusters: &[Vec<u64>]) -> f64 {
    let l = clusters[0].len();
    let mut one_hot = vec![0u64; l];
    one_hot[0] = 1;
    let tm = cv_oracle(&one_hot);
    let n: u64 = clusters.iter().flatten().sum();
    let wa = clusters
        .iter()
        .map(|c| c.iter().sum::<u64>() as f64 * cv_oracle(c))
        .sum::<f64>()
        / n as f64;
    wa / tm
}

pub fn cos_oracle(a: &[f32], b: &[f32]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    ab / (aa.sqrt() * bb.sqrt())
}

/// Mean cosine over all cross pairs.
pub fn aps_oracle(a: &[&[f32]], b: &[&[f32]]) -> f64 {
    let mut s = 0.0;
    for x in a {
        for y in b {
            s += cos_oracle(x, y);
        }
    }
    s / (a.len() * b.len()) as f64
}

/// Mean cosine over unordered pairs of distinct members; `None` below two.
pub fn ais_oracle(e: &[&[f32]]) -> Option<f64> {
    if e.len() < 2 {
        return None;
    }
    let mut s = 0.0;
    let mut n = 0usize;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            s += cos_oracle(e[i], e[j]);
            n += 1;
        }
    }
    Some(s / n as f64)
}

pub fn sse_oracle(points: &[&[f32]], members: &[usize]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let dim = points[0].len();
    let mut mean = vec![0.0f64; dim];
    for &i in members {
        for (m, &x) in mean.iter_mut().zip(points[i]) {
            *m += x as f64;
        }
    }
    for m in &mut mean {
        *m /= members.len() as f64;
    }
    members
        .iter()
        .map(|&i| {
            points[i]
                .iter()
                .zip(&mean)
                .map(|(&x, m)| (x as f64 - m).powi(2))
                .sum::<f64>()
        })
        .sum()
}

/// Minimum within-cluster sum of squares over every split into two
/// nonempty groups.
pub fn best_two_partition(points: &[&[f32]]) -> (f64, Vec<usize>) {
    let n = points.len();
    assert!((2..=20).contains(&n));
    let mut best = (f64::INFINITY, vec![]);
    // Fix point 0 in group 0 so every split is visited once.
    for mask in 1u32..(1 << (n - 1)) {
        let labels: Vec<usize> = (0..n)
            .map(|i| {
                if i == 0 {
                    0
                } else {
                    ((mask >> (i - 1)) & 1) as usize
                }
            })
            .collect();
        let g0: Vec<usize> = (0..n).filter(|&i| labels[i] == 0).collect();
        let g1: Vec<usize> = (0..n).filter(|&i| labels[i] == 1).collect();
        let sse = sse_oracle(points, &g0) + sse_oracle(points, &g1);
        if sse < best.0 {
            best = (sse, labels);
        }
    }
    best
}

/// Jensen-Shannon divergence in bits, summed term by term.
pub fn jsd_oracle(p: &[f64], q: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        let m = (a + b) / 2.0;
        if a > 0.0 {
            s += 0.5 * a * (a / m).log2();
        }
        if b > 0.0 {
            s += 0.5 * b * (b / m).log2();
        }
    }
    s
}
