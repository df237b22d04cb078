//! Cosine geometry shared by every analysis.
//!
//! Inputs may be `f32` (stored embeddings) or `f64` (derived prototypes);
//! all sums accumulate in `f64`.
//!
//! Pairwise aggregates use sums of unit vectors instead of pair loops. For
//! unit vectors `u_i` with sum `s`:
//!
//! ```text
//! APS(E1, E2) = s1 · s2 / (|E1| |E2|)
//! AIS(E)      = (|s|² − Σ |u_i|²) / (|E| (|E| − 1))
//! ```
//!
//! which turns the quadratic pair loop into one pass over the members.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub mod isotropy;

pub use isotropy::{acs_isotropy, acs_vectors, SimilaritySummary, HISTOGRAM_BINS};

/// Scalar types a vector component may have.
pub trait Component: Copy + Into<f64> + Send + Sync {}
impl Component for f32 {}
impl Component for f64 {}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionConflict { left: a, right: b });
    }
    Ok(())
}

pub fn dot<A: Component, B: Component>(a: &[A], b: &[B]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x.into() * y.into()).sum()
}

pub fn norm_sq<A: Component>(a: &[A]) -> f64 {
    a.iter()
        .map(|&x| {
            let x: f64 = x.into();
            x * x
        })
        .sum()
}

pub fn squared_distance<A: Component, B: Component>(a: &[A], b: &[B]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x.into() - y.into();
            d * d
        })
        .sum()
}

/// Cosine similarity, clamped to `[-1, 1]`.
pub fn cosine<A: Component, B: Component>(a: &[A], b: &[B]) -> Result<f64> {
    check_dims(a.len(), b.len())?;
    let na = norm_sq(a);
    let nb = norm_sq(b);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    // sqrt(na * nb) instead of sqrt(na) * sqrt(nb): identical inputs give exactly 1.
    Ok((dot(a, b) / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// Componentwise arithmetic mean.
pub fn mean_vector<'a, T: Component + 'a>(
    set: impl IntoIterator<Item = &'a [T]>,
) -> Result<Vec<f64>> {
    let mut iter = set.into_iter();
    let first = iter
        .next()
        .ok_or(Error::EmptyInput("mean of an empty set"))?;
    let mut sum: Vec<f64> = first.iter().map(|&x| x.into()).collect();
    let mut n = 1usize;
    for v in iter {
        check_dims(sum.len(), v.len())?;
        for (s, &x) in sum.iter_mut().zip(v) {
            *s += x.into();
        }
        n += 1;
    }
    let n = n as f64;
    sum.iter_mut().for_each(|s| *s /= n);
    Ok(sum)
}

/// Sum of the unit-normalized members of a set.
#[derive(Debug, Clone)]
pub struct UnitSum {
    pub sum: Vec<f64>,
    /// Σ |u_i|², equal to `count` up to rounding.
    pub self_sq: f64,
    pub count: usize,
}

impl UnitSum {
    pub fn new<'a, T: Component + 'a>(set: impl IntoIterator<Item = &'a [T]>) -> Result<Self> {
        let mut sum: Option<Vec<f64>> = None;
        let mut self_sq = 0.0;
        let mut count = 0;
        for v in set {
            let n = norm_sq(v);
            if n == 0.0 {
                return Err(Error::ZeroNorm);
            }
            let inv = 1.0 / n.sqrt();
            let acc = sum.get_or_insert_with(|| vec![0.0; v.len()]);
            check_dims(acc.len(), v.len())?;
            let mut sq = 0.0;
            for (s, &x) in acc.iter_mut().zip(v) {
                let u = x.into() * inv;
                *s += u;
                sq += u * u;
            }
            self_sq += sq;
            count += 1;
        }
        let sum = sum.ok_or(Error::EmptyInput("unit sum of an empty set"))?;
        Ok(UnitSum {
            sum,
            self_sq,
            count,
        })
    }

    /// Mean cosine over all cross pairs with `other`.
    pub fn cross_similarity(&self, other: &UnitSum) -> Result<f64> {
        check_dims(self.sum.len(), other.sum.len())?;
        let v = dot(&self.sum, &other.sum) / (self.count as f64 * other.count as f64);
        Ok(v.clamp(-1.0, 1.0))
    }

    /// Mean cosine over unordered distinct pairs within the set.
    pub fn inner_similarity(&self) -> Ais {
        if self.count < 2 {
            return Ais::InsufficientMembers;
        }
        let n = self.count as f64;
        let v = (norm_sq(&self.sum) - self.self_sq) / (n * (n - 1.0));
        Ais::Score(v.clamp(-1.0, 1.0))
    }
}

/// Average pairwise similarity between two sets.
pub fn aps<'a, 'b, A: Component + 'a, B: Component + 'b>(
    e1: impl IntoIterator<Item = &'a [A]>,
    e2: impl IntoIterator<Item = &'b [B]>,
) -> Result<f64> {
    UnitSum::new(e1)?.cross_similarity(&UnitSum::new(e2)?)
}

/// Average inner similarity of a set.
pub fn ais<'a, T: Component + 'a>(e: impl IntoIterator<Item = &'a [T]>) -> Result<Ais> {
    let mut iter = e.into_iter().peekable();
    if iter.peek().is_none() {
        return Err(Error::EmptyInput("inner similarity of an empty set"));
    }
    Ok(UnitSum::new(iter)?.inner_similarity())
}

/// Inner similarity of a set, undefined below two members.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ais {
    Score(f64),
    InsufficientMembers,
}

const INSUFFICIENT: &str = "insufficient members";

impl Ais {
    pub fn score(self) -> Option<f64> {
        match self {
            Ais::Score(v) => Some(v),
            Ais::InsufficientMembers => None,
        }
    }
}

impl fmt::Display for Ais {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ais::Score(v) => write!(f, "{v}"),
            Ais::InsufficientMembers => f.write_str(INSUFFICIENT),
        }
    }
}

impl Serialize for Ais {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Ais::Score(v) => s.serialize_f64(*v),
            Ais::InsufficientMembers => s.serialize_str(INSUFFICIENT),
        }
    }
}

impl<'de> Deserialize<'de> for Ais {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Score(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Score(v) => Ok(Ais::Score(v)),
            Raw::Tag(t) if t == INSUFFICIENT => Ok(Ais::InsufficientMembers),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!(
                "unexpected AIS value {t:?}"
            ))),
        }
    }
}
