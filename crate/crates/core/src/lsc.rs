//! Diachronic indicators: per-year sense-cluster frequencies, Jensen-Shannon
//! divergence between consecutive years, and cosine distance between yearly
//! prototypes (CDPT).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Dataset;
use crate::vectormath::{cosine, mean_vector, Component};
use crate::wsi::ClusteringSolution;

/// Tolerance on distribution sums.
pub const NORMALIZATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    /// Bits; JSD lies in `[0, 1]`.
    #[default]
    Two,
    /// Nats; JSD lies in `[0, ln 2]`.
    E,
}

impl LogBase {
    fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Two => x.log2(),
            LogBase::E => x.ln(),
        }
    }
}

fn check_distribution(d: &[f64]) -> Result<()> {
    if d.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "distribution has a negative or non-finite entry".into(),
        ));
    }
    let s: f64 = d.iter().sum();
    if (s - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized(s));
    }
    Ok(())
}

/// KL(p ‖ m) where `m` is positive wherever `p` is.
fn kl(p: &[f64], m: &[f64], base: LogBase) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &mi)| pi * base.log(pi / mi))
        .sum()
}

/// Jensen-Shannon divergence of two probability vectors.
pub fn jsd(d1: &[f64], d2: &[f64], base: LogBase) -> Result<f64> {
    if d1.len() != d2.len() {
        return Err(Error::DimensionConflict {
            left: d1.len(),
            right: d2.len(),
        });
    }
    check_distribution(d1)?;
    check_distribution(d2)?;
    let m: Vec<f64> = d1.iter().zip(d2).map(|(a, b)| (a + b) / 2.0).collect();
    let v = 0.5 * (kl(d1, &m, base) + kl(d2, &m, base));
    Ok(v.max(0.0))
}

/// One minus the cosine between the mean vectors of two sets.
pub fn cdpt<'a, 'b, A: Component + 'a, B: Component + 'b>(
    year_a: impl IntoIterator<Item = &'a [A]>,
    year_b: impl IntoIterator<Item = &'b [B]>,
) -> Result<f64> {
    let pa = mean_vector(year_a)?;
    let pb = mean_vector(year_b)?;
    Ok(1.0 - cosine(&pa, &pb)?)
}

/// Per-year cluster counts over the full calendar range of the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearSeries {
    pub k: usize,
    pub years: Vec<i32>,
    pub counts: Vec<Vec<u64>>,
    pub totals: Vec<u64>,
    /// `None` for years without occurrences.
    pub norm_freq: Vec<Option<Vec<f64>>>,
    /// Records without a year, left out of every row.
    pub undated: usize,
}

impl YearSeries {
    pub fn has_data(&self, row: usize) -> bool {
        self.totals[row] > 0
    }

    /// `year, cluster_0 … cluster_{k−1}, total, overall_rel_freq`. Cluster
    /// columns hold normalized frequencies; `overall_rel_freq` is the year's
    /// share of all dated occurrences. Years without data leave the
    /// frequency columns empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("year");
        for c in 0..self.k {
            out.push_str(&format!(",cluster_{c}"));
        }
        out.push_str(",total,overall_rel_freq\n");
        let grand: u64 = self.totals.iter().sum();
        for (i, year) in self.years.iter().enumerate() {
            out.push_str(&year.to_string());
            match &self.norm_freq[i] {
                Some(f) => f.iter().for_each(|v| out.push_str(&format!(",{v}"))),
                None => (0..self.k).for_each(|_| out.push(',')),
            }
            out.push_str(&format!(",{},", self.totals[i]));
            if self.totals[i] > 0 {
                out.push_str(&(self.totals[i] as f64 / grand as f64).to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn dated_cluster(
    solution: &ClusteringSolution,
    record: &crate::ingest::EmbeddingRecord,
) -> Result<usize> {
    solution
        .cluster_of(&record.occurrence_id)
        .filter(|&c| c < solution.k)
        .ok_or_else(|| Error::Unassigned(record.occurrence_id.clone()))
}

pub fn year_series(records: &Dataset, solution: &ClusteringSolution) -> Result<YearSeries> {
    let mut buckets: BTreeMap<i32, Vec<u64>> = BTreeMap::new();
    let mut undated = 0;
    for r in records.records() {
        let c = dated_cluster(solution, r)?;
        match r.year {
            Some(y) => buckets.entry(y).or_insert_with(|| vec![0; solution.k])[c] += 1,
            None => undated += 1,
        }
    }
    let (&first, _) = buckets.first_key_value().ok_or(Error::NoDatedRecords)?;
    let (&last, _) = buckets.last_key_value().expect("non-empty");
    let years: Vec<i32> = (first..=last).collect();
    let counts: Vec<Vec<u64>> = years
        .iter()
        .map(|y| {
            buckets
                .get(y)
                .cloned()
                .unwrap_or_else(|| vec![0; solution.k])
        })
        .collect();
    let totals: Vec<u64> = counts.iter().map(|c| c.iter().sum()).collect();
    let norm_freq = counts
        .iter()
        .zip(&totals)
        .map(|(c, &t)| (t > 0).then(|| c.iter().map(|&x| x as f64 / t as f64).collect()))
        .collect();
    Ok(YearSeries {
        k: solution.k,
        years,
        counts,
        totals,
        norm_freq,
        undated,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeEntry {
    pub year_from: i32,
    pub year_to: i32,
    pub jsd: f64,
    /// `None` when a yearly prototype has zero norm.
    pub cdpt: Option<f64>,
    pub n_left: u64,
    pub n_right: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangeSeries {
    pub log_base: LogBase,
    pub entries: Vec<ChangeEntry>,
    /// Adjacent year pairs with no data on at least one side.
    pub skipped: Vec<(i32, i32)>,
}

impl ChangeSeries {
    /// `year_from, year_to, jsd, cdpt`; an undefined CDPT is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("year_from,year_to,jsd,cdpt\n");
        for e in &self.entries {
            let cdpt = e.cdpt.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                e.year_from, e.year_to, e.jsd, cdpt
            ));
        }
        out
    }
}

/// JSD and CDPT for every pair of adjacent calendar years that both carry data.
pub fn change_series(
    records: &Dataset,
    solution: &ClusteringSolution,
    base: LogBase,
) -> Result<ChangeSeries> {
    let series = year_series(records, solution)?;
    if series.totals.iter().filter(|&&t| t > 0).count() < 2 {
        return Err(Error::NotEnoughYears);
    }

    let mut sums: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for r in records.records() {
        if let Some(y) = r.year {
            let s = sums.entry(y).or_insert_with(|| vec![0.0; records.dim()]);
            for (a, &x) in s.iter_mut().zip(&r.vector) {
                *a += x as f64;
            }
        }
    }

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for i in 0..series.years.len().saturating_sub(1) {
        let (ya, yb) = (series.years[i], series.years[i + 1]);
        let (Some(fa), Some(fb)) = (&series.norm_freq[i], &series.norm_freq[i + 1]) else {
            skipped.push((ya, yb));
            continue;
        };
        let (na, nb) = (series.totals[i], series.totals[i + 1]);
        let pa: Vec<f64> = sums[&ya].iter().map(|s| s / na as f64).collect();
        let pb: Vec<f64> = sums[&yb].iter().map(|s| s / nb as f64).collect();
        let cdpt = match cosine(&pa, &pb) {
            Ok(c) => Some(1.0 - c),
            Err(Error::ZeroNorm) => None,
            Err(e) => return Err(e),
        };
        entries.push(ChangeEntry {
            year_from: ya,
            year_to: yb,
            jsd: jsd(fa, fb, base)?,
            cdpt,
            n_left: na,
            n_right: nb,
        });
    }
    Ok(ChangeSeries {
        log_base: base,
        entries,
        skipped,
    })
}
