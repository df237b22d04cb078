//! Supervised sense prediction with per-label prototypes and a
//! nearest-prototype (1NN, cosine) rule, scored by weighted F1.

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{filter_records, Dataset, EmbeddingRecord, LabelSubset};
use crate::rng;
use crate::vectormath::{cosine, mean_vector};

/// Mean embedding of every subset label, in rank order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrototypeSet {
    pub subset: LabelSubset,
    pub prototypes: IndexMap<String, Vec<f64>>,
    pub support: IndexMap<String, usize>,
}

impl PrototypeSet {
    /// Label of the most cosine-similar prototype. Equal similarities go to
    /// the better frequency rank.
    pub fn predict(&self, vector: &[f32]) -> Result<&str> {
        let mut best: Option<(&str, f64)> = None;
        for (label, proto) in &self.prototypes {
            let sim = cosine(vector, proto)?;
            if best.is_none_or(|(_, b)| sim > b) {
                best = Some((label, sim));
            }
        }
        best.map(|(l, _)| l)
            .ok_or(Error::EmptyInput("prototype set has no labels"))
    }
}

/// Records without a subset label are ignored.
pub fn build_prototypes(train: &Dataset, subset: &LabelSubset) -> Result<PrototypeSet> {
    let mut prototypes = IndexMap::new();
    let mut support = IndexMap::new();
    for label in &subset.labels {
        let members: Vec<&[f32]> = train
            .records()
            .iter()
            .filter(|r| r.label.as_deref() == Some(label.as_str()))
            .map(|r| r.vector.as_slice())
            .collect();
        if members.is_empty() {
            return Err(Error::MissingLabel(label.clone()));
        }
        support.insert(label.clone(), members.len());
        prototypes.insert(label.clone(), mean_vector(members)?);
    }
    Ok(PrototypeSet {
        subset: subset.clone(),
        prototypes,
        support,
    })
}

pub fn predict_1nn<'p>(record: &EmbeddingRecord, prototypes: &'p PrototypeSet) -> Result<&'p str> {
    prototypes.predict(&record.vector)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub per_label: IndexMap<String, LabelScores>,
    pub weighted_f1: f64,
    /// Rows are gold labels, columns predictions, both in rank order.
    pub confusion: Vec<Vec<usize>>,
    pub n: usize,
}

impl EvalReport {
    /// Scores index-coded gold/predicted pairs against `labels`.
    pub fn from_predictions(labels: &[String], pairs: &[(usize, usize)]) -> Self {
        let l = labels.len();
        let mut confusion = vec![vec![0usize; l]; l];
        for &(gold, pred) in pairs {
            confusion[gold][pred] += 1;
        }
        let n = pairs.len();
        let mut per_label = IndexMap::new();
        let mut weighted_f1 = 0.0;
        for (i, label) in labels.iter().enumerate() {
            let tp = confusion[i][i];
            let support: usize = confusion[i].iter().sum();
            let predicted: usize = confusion.iter().map(|row| row[i]).sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            if n > 0 {
                weighted_f1 += support as f64 / n as f64 * f1;
            }
            per_label.insert(
                label.clone(),
                LabelScores {
                    precision,
                    recall,
                    f1,
                    support,
                },
            );
        }
        EvalReport {
            labels: labels.to_vec(),
            per_label,
            weighted_f1,
            confusion,
            n,
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Classifies every record of `test` and scores the predictions.
pub fn evaluate(test: &Dataset, prototypes: &PrototypeSet) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyInput("test set"));
    }
    let subset = &prototypes.subset;
    let pairs = test
        .records()
        .par_iter()
        .map(|r| {
            let gold = r
                .label
                .as_deref()
                .and_then(|l| subset.index_of(l))
                .ok_or_else(|| Error::UnexpectedLabel {
                    id: r.occurrence_id.clone(),
                })?;
            let pred = prototypes.predict(&r.vector)?;
            Ok((
                gold,
                subset
                    .index_of(pred)
                    .expect("prototype labels come from the subset"),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_predictions(&subset.labels, &pairs))
}

/// How prototypes and evaluation records are drawn from the labeled pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SplitProtocol {
    /// Prototypes built from and evaluated on the same records.
    None,
    /// Per-label 80/20 train/test split.
    Stratified2080,
}

/// Deterministic per-label 80/20 split. Every label keeps at least one
/// training record; the test side may be empty for tiny labels.
pub fn stratified_split(
    dataset: &Dataset,
    subset: &LabelSubset,
    seed: u64,
) -> Result<(Dataset, Option<Dataset>)> {
    let mut train_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (rank0, label) in subset.labels.iter().enumerate() {
        let mut idx: Vec<usize> = dataset
            .records()
            .iter()
            .enumerate()
            .filter(|(_, r)| r.label.as_deref() == Some(label.as_str()))
            .map(|(i, _)| i)
            .collect();
        idx.shuffle(&mut rng::stream(seed, "wsd-split", rank0 as u64));
        let n_test = idx.len() / 5;
        test_idx.extend_from_slice(&idx[..n_test]);
        train_idx.extend_from_slice(&idx[n_test..]);
    }
    let take = |mut idx: Vec<usize>| -> Option<Result<Dataset>> {
        if idx.is_empty() {
            return None;
        }
        idx.sort_unstable();
        let records = idx.iter().map(|&i| dataset.records()[i].clone()).collect();
        Some(Dataset::new(records, dataset.source_path()))
    };
    let train = take(train_idx).ok_or(Error::EmptySelection)??;
    let test = take(test_idx).transpose()?;
    Ok((train, test))
}

/// Everything a WSD evaluation run produces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WsdOutcome {
    pub split: SplitProtocol,
    pub seed: u64,
    pub subset: LabelSubset,
    pub prototype_support: IndexMap<String, usize>,
    pub report: EvalReport,
}

/// Builds prototypes for the top-`k` labels and evaluates them under `split`.
pub fn run(dataset: &Dataset, k: usize, split: SplitProtocol, seed: u64) -> Result<WsdOutcome> {
    let subset = crate::ingest::build_label_subset(dataset, k)?;
    let pool = filter_records(dataset, Some(&subset), None).into_dataset()?;
    let (train, test) = match split {
        SplitProtocol::None => (pool.clone(), pool),
        SplitProtocol::Stratified2080 => {
            let (train, test) = stratified_split(&pool, &subset, seed)?;
            (train, test.ok_or(Error::EmptyInput("test split"))?)
        }
    };
    let prototypes = build_prototypes(&train, &subset)?;
    let report = evaluate(&test, &prototypes)?;
    Ok(WsdOutcome {
        split,
        seed,
        subset,
        prototype_support: prototypes.support,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::LabelRanking;

    fn rec(id: &str, v: &[f32], label: &str) -> EmbeddingRecord {
        EmbeddingRecord {
            occurrence_id: id.into(),
            term: "planck".into(),
            vector: v.to_vec(),
            corpus_id: "t".into(),
            paragraph_id: id.into(),
            year: None,
            label: Some(label.into()),
            context_tokens: None,
        }
    }

    fn two_label() -> (Dataset, LabelSubset) {
        let ds = Dataset::new(
            vec![
                rec("a1", &[1.0, 0.0], "A"),
                rec("a2", &[1.0, 0.1], "A"),
                rec("a3", &[1.0, -0.1], "A"),
                rec("b1", &[0.0, 1.0], "B"),
                rec("b2", &[0.1, 1.0], "B"),
            ],
            "",
        )
        .unwrap();
        let subset = LabelRanking::from_dataset(&ds).top(2).unwrap();
        (ds, subset)
    }

    #[test]
    fn singleton_prototypes_equal_records() {
        let ds = Dataset::new(
            vec![rec("a", &[1.0, 2.0], "A"), rec("b", &[3.0, -1.0], "B")],
            "",
        )
        .unwrap();
        let subset = LabelRanking::from_dataset(&ds).top(2).unwrap();
        let p = build_prototypes(&ds, &subset).unwrap();
        assert_eq!(p.prototypes["A"], vec![1.0, 2.0]);
        assert_eq!(p.prototypes["B"], vec![3.0, -1.0]);
        assert_eq!(p.support["A"], 1);
    }

    #[test]
    fn prototype_is_label_mean() {
        let (ds, subset) = two_label();
        let p = build_prototypes(&ds, &subset).unwrap();
        // (1+1+1)/3, (0+0.1-0.1)/3 in f64 over f32 inputs
        let y = (0.0f64 + 0.1f32 as f64 + (-0.1f32) as f64) / 3.0;
        assert_eq!(p.prototypes["A"], vec![1.0, y]);
    }

    #[test]
    fn missing_label_is_named() {
        let (ds, _) = two_label();
        let subset = LabelRanking::from_labels(["A", "B", "C"]).top(3).unwrap();
        match build_prototypes(&ds, &subset) {
            Err(Error::MissingLabel(l)) => assert_eq!(l, "C"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tie_goes_to_better_rank() {
        let (ds, subset) = two_label();
        let mut p = build_prototypes(&ds, &subset).unwrap();
        p.prototypes["A"] = vec![1.0, 0.0];
        p.prototypes["B"] = vec![0.0, 1.0];
        let r = rec("q", &[1.0, 1.0], "B");
        assert_eq!(predict_1nn(&r, &p).unwrap(), "A");
        let r = rec("q", &[1.0, 0.0], "B");
        assert_eq!(predict_1nn(&r, &p).unwrap(), "A");
        let r = rec("q", &[0.0, 2.0], "B");
        assert_eq!(predict_1nn(&r, &p).unwrap(), "B");
    }

    #[test]
    fn perfect_and_collapsed_predictions() {
        let labels = vec!["A".to_string(), "B".to_string()];
        let r = EvalReport::from_predictions(&labels, &[(0, 0), (1, 1), (1, 1)]);
        assert_eq!(r.weighted_f1, 1.0);

        // Balanced two-label set, everything predicted as A: F1 = {2/3, 0}.
        let r = EvalReport::from_predictions(&labels, &[(0, 0), (0, 0), (1, 0), (1, 0)]);
        assert!((r.per_label["A"].f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.per_label["B"].f1, 0.0);
        assert!((r.weighted_f1 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.confusion, vec![vec![2, 0], vec![2, 0]]);
    }

    #[test]
    fn evaluate_rejects_foreign_labels_and_empty_sets() {
        let (ds, subset) = two_label();
        let p = build_prototypes(&ds, &subset).unwrap();
        let other = Dataset::new(vec![rec("x", &[1.0, 0.0], "Z")], "").unwrap();
        assert!(matches!(
            evaluate(&other, &p),
            Err(Error::UnexpectedLabel { .. })
        ));
    }

    #[test]
    fn in_sample_separated_labels_score_one() {
        let (ds, _) = two_label();
        let out = run(&ds, 2, SplitProtocol::None, 0).unwrap();
        assert_eq!(out.report.weighted_f1, 1.0);
        for (i, row) in out.report.confusion.iter().enumerate() {
            let label = &out.report.labels[i];
            assert_eq!(
                row.iter().sum::<usize>(),
                out.report.per_label[label].support
            );
        }
    }

    #[test]
    fn stratified_split_is_deterministic_and_disjoint() {
        let mut records = Vec::new();
        for i in 0..20 {
            records.push(rec(&format!("a{i}"), &[1.0, i as f32], "A"));
            records.push(rec(&format!("b{i}"), &[-1.0, i as f32], "B"));
        }
        records.push(rec("c0", &[0.0, 1.0], "C"));
        let ds = Dataset::new(records, "").unwrap();
        let subset = LabelRanking::from_dataset(&ds).top(3).unwrap();
        let (train, test) = stratified_split(&ds, &subset, 9).unwrap();
        let test = test.unwrap();
        assert_eq!(train.len(), 33);
        assert_eq!(test.len(), 8);
        assert!(test
            .records()
            .iter()
            .all(|r| train.get(&r.occurrence_id).is_none()));
        assert!(train.get("c0").is_some());
        let (train2, _) = stratified_split(&ds, &subset, 9).unwrap();
        assert_eq!(train, train2);
    }
}
