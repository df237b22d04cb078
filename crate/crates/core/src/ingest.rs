//! Embedding-record files: parsing, validation, label ranking and filtered views.
//!
//! A dataset is a JSON-Lines file with one [`EmbeddingRecord`] per line and an
//! optional sidecar header (`<stem>.header.json`) declaring the vector
//! dimension and corpus tag.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One occurrence of the target term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub occurrence_id: String,
    pub term: String,
    pub vector: Vec<f32>,
    pub corpus_id: String,
    pub paragraph_id: String,
    #[serde(default)]
    pub year: Option<i32>,
    #[serde(default)]
    pub label: Option<String>,
    /// Lowercased tokens within ten positions of the occurrence.
    #[serde(default)]
    pub context_tokens: Option<Vec<String>>,
}

/// Sidecar header declaring dataset-level properties.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub dim: usize,
    #[serde(default)]
    pub corpus_id: Option<String>,
}

/// A validated, immutable collection of records sharing one dimension.
#[derive(Debug, Clone)]
pub struct Dataset {
    records: Vec<EmbeddingRecord>,
    dim: usize,
    source_path: String,
    index: HashMap<String, usize>,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.records == other.records
    }
}

impl Dataset {
    /// Validates `records` and builds the id index. Positions are reported
    /// as 1-based line numbers, matching the on-disk layout.
    pub fn new(records: Vec<EmbeddingRecord>, source_path: impl Into<String>) -> Result<Self> {
        let dim = records.first().ok_or(Error::EmptyDataset)?.vector.len();
        let mut index = HashMap::with_capacity(records.len());
        for (pos, record) in records.iter().enumerate() {
            let line = pos + 1;
            validate_vector(&record.vector, dim, line)?;
            if index.insert(record.occurrence_id.clone(), pos).is_some() {
                return Err(Error::DuplicateId {
                    line,
                    id: record.occurrence_id.clone(),
                });
            }
        }
        Ok(Dataset {
            records,
            dim,
            source_path: source_path.into(),
            index,
        })
    }

    pub fn records(&self) -> &[EmbeddingRecord] {
        &self.records
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn source_path(&self) -> &str {
        &self.source_path
    }

    pub fn get(&self, occurrence_id: &str) -> Option<&EmbeddingRecord> {
        self.index.get(occurrence_id).map(|&i| &self.records[i])
    }

    pub fn position(&self, occurrence_id: &str) -> Option<usize> {
        self.index.get(occurrence_id).copied()
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.records.iter().map(|r| r.vector.as_slice())
    }

    /// Header describing this dataset. `corpus_id` is set when every record
    /// shares one corpus tag.
    pub fn header(&self) -> DatasetHeader {
        let first = &self.records[0].corpus_id;
        let shared = self.records.iter().all(|r| &r.corpus_id == first);
        DatasetHeader {
            dim: self.dim,
            corpus_id: shared.then(|| first.clone()),
        }
    }

    pub fn into_records(self) -> Vec<EmbeddingRecord> {
        self.records
    }
}

fn validate_vector(vector: &[f32], dim: usize, line: usize) -> Result<()> {
    if vector.len() != dim {
        return Err(Error::DimensionMismatch {
            line,
            expected: dim,
            found: vector.len(),
        });
    }
    if let Some(index) = vector.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { line, index });
    }
    if vector.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroNormRecord { line });
    }
    Ok(())
}

/// Path of the sidecar header for a dataset file: `dir/stem.header.json`.
pub fn header_path(dataset_path: &Path) -> PathBuf {
    let stem = dataset_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    dataset_path.with_file_name(format!("{stem}.header.json"))
}

pub fn read_header(path: &Path) -> Result<Option<DatasetHeader>> {
    let hp = header_path(path);
    if !hp.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&hp).map_err(|e| Error::io(&hp, e))?;
    let header: DatasetHeader =
        serde_json::from_str(&text).map_err(|e| Error::Header(e.to_string()))?;
    if header.dim == 0 {
        return Err(Error::Header("dim must be positive".into()));
    }
    Ok(Some(header))
}

/// Loads and validates a JSONL dataset.
///
/// The dimension is taken from `expected_dim`, else from the sidecar header,
/// else from the first record. A header that disagrees with `expected_dim`
/// is an error.
pub fn load_dataset(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let header = read_header(path)?;
    let mut dim = match (expected_dim, &header) {
        (Some(e), Some(h)) if e != h.dim => {
            return Err(Error::Header(format!(
                "header declares dim {} but {} was expected",
                h.dim, e
            )))
        }
        (Some(e), _) => Some(e),
        (None, Some(h)) => Some(h.dim),
        (None, None) => None,
    };

    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut seen = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: EmbeddingRecord =
            serde_json::from_str(&line).map_err(|e| Error::MalformedLine {
                line: line_no,
                message: e.to_string(),
            })?;
        let d = *dim.get_or_insert(record.vector.len());
        validate_vector(&record.vector, d, line_no)?;
        if seen
            .insert(record.occurrence_id.clone(), records.len())
            .is_some()
        {
            return Err(Error::DuplicateId {
                line: line_no,
                id: record.occurrence_id,
            });
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset {
        dim: dim.unwrap_or(0),
        records,
        source_path: path.display().to_string(),
        index: seen,
    })
}

pub fn write_records<W: Write>(records: &[EmbeddingRecord], mut out: W) -> Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n").map_err(|e| Error::io("<writer>", e))?;
    }
    Ok(())
}

/// Writes the dataset as JSONL plus its sidecar header.
pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_records(dataset.records(), &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))?;
    let hp = header_path(path);
    let header = serde_json::to_string_pretty(&dataset.header())?;
    std::fs::write(&hp, header + "\n").map_err(|e| Error::io(&hp, e))?;
    Ok(())
}

/// Every distinct label of a dataset ordered by descending frequency, ties
/// broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRanking {
    pub labels: Vec<String>,
    pub counts: Vec<usize>,
}

impl LabelRanking {
    pub fn from_dataset(dataset: &Dataset) -> Self {
        Self::from_labels(dataset.records().iter().filter_map(|r| r.label.as_deref()))
    }

    pub fn from_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Self {
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for label in labels {
            *counts.entry(label).or_default() += 1;
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        // BTreeMap order is lexicographic; a stable sort keeps it within ties.
        ranked.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
        LabelRanking {
            labels: ranked.iter().map(|(l, _)| l.to_string()).collect(),
            counts: ranked.iter().map(|(_, c)| *c).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// 1-based frequency rank.
    pub fn rank_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label).map(|i| i + 1)
    }

    /// The `k` most frequent labels.
    pub fn top(&self, k: usize) -> Result<LabelSubset> {
        if k < 2 {
            return Err(Error::SubsetTooSmall(k));
        }
        if k > self.labels.len() {
            return Err(Error::NotEnoughLabels {
                requested: k,
                available: self.labels.len(),
            });
        }
        let labels = self.labels[..k].to_vec();
        let rank_of = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i + 1))
            .collect();
        Ok(LabelSubset { labels, k, rank_of })
    }
}

/// The top-k most frequent labels of a corpus with their ranks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSubset {
    pub labels: Vec<String>,
    pub k: usize,
    pub rank_of: BTreeMap<String, usize>,
}

impl LabelSubset {
    pub fn contains(&self, label: &str) -> bool {
        self.rank_of.contains_key(label)
    }

    pub fn rank(&self, label: &str) -> Option<usize> {
        self.rank_of.get(label).copied()
    }

    /// 0-based position of `label` in the subset.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.rank(label).map(|r| r - 1)
    }
}

pub fn build_label_subset(dataset: &Dataset, k: usize) -> Result<LabelSubset> {
    LabelRanking::from_dataset(dataset).top(k)
}

/// Result of [`filter_records`]. An empty selection is reported, not raised.
#[derive(Debug, Clone)]
pub struct Filtered {
    pub dataset: Option<Dataset>,
    pub dropped: usize,
}

impl Filtered {
    pub fn is_empty(&self) -> bool {
        self.dataset.is_none()
    }

    pub fn into_dataset(self) -> Result<Dataset> {
        self.dataset.ok_or(Error::EmptySelection)
    }
}

/// Keeps records whose label lies in `subset` and whose year lies in `years`.
/// Unlabeled records are dropped when a subset is given; undated records are
/// dropped when a year range is given.
pub fn filter_records(
    dataset: &Dataset,
    subset: Option<&LabelSubset>,
    years: Option<RangeInclusive<i32>>,
) -> Filtered {
    let keep = |r: &EmbeddingRecord| {
        let label_ok = subset.is_none_or(|s| r.label.as_deref().is_some_and(|l| s.contains(l)));
        let year_ok = years
            .as_ref()
            .is_none_or(|range| r.year.is_some_and(|y| range.contains(&y)));
        label_ok && year_ok
    };
    let kept: Vec<EmbeddingRecord> = dataset
        .records
        .iter()
        .filter(|r| keep(r))
        .cloned()
        .collect();
    let dropped = dataset.len() - kept.len();
    if kept.is_empty() {
        return Filtered {
            dataset: None,
            dropped,
        };
    }
    let index = kept
        .iter()
        .enumerate()
        .map(|(i, r)| (r.occurrence_id.clone(), i))
        .collect();
    Filtered {
        dataset: Some(Dataset {
            records: kept,
            dim: dataset.dim,
            source_path: dataset.source_path.clone(),
            index,
        }),
        dropped,
    }
}

/// Distinct corpus tags in first-seen order.
pub fn corpus_ids(dataset: &Dataset) -> Vec<String> {
    let mut seen = HashSet::new();
    dataset
        .records
        .iter()
        .filter(|r| seen.insert(r.corpus_id.as_str()))
        .map(|r| r.corpus_id.clone())
        .collect()
}
