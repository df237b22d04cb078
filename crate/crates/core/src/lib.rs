//! Sense analytics over contextualized word embeddings of one target term.
//!
//! The crate takes embedding records (one vector per occurrence of the term,
//! with corpus, year, optional gold sense label and context words) and runs:
//!
//! - [`wsd`]: per-label prototypes and nearest-prototype sense prediction,
//!   scored by weighted F1;
//! - [`wsi`]: K-means sense induction with best-of-N restarts by inertia,
//!   cluster profiles and the AIS/APS cohesion-separation heatmap;
//! - [`purity`]: the coefficient-of-variation purity of a clustering;
//! - [`lsc`]: yearly cluster frequencies, Jensen-Shannon divergence and
//!   cosine distance between yearly prototypes;
//! - [`vectormath`]: cosine kernels and the average-cosine isotropy probe.
//!
//! ```
//! use cwe_senses::purity::{purity_of_distributions, LabelDistribution, Sigma};
//!
//! let clusters = [
//!     LabelDistribution::new(vec![3, 1]),
//!     LabelDistribution::new(vec![0, 4]),
//! ];
//! let (_, _, wa_cv, tm, purity) = purity_of_distributions(&clusters, Sigma::Population).unwrap();
//! assert_eq!((wa_cv, tm, purity), (0.75, 1.0, 0.75));
//! ```
//!
//! The `book/` directory holds a longer guide; its code listings compile as
//! doc-tests of this crate.

pub mod cli;
pub mod error;
pub mod ingest;
pub mod lsc;
pub mod purity;
pub mod rng;
pub mod stopwords;
pub mod synth;
pub mod vectormath;
pub mod wsd;
pub mod wsi;

pub use error::{Error, Result};
pub use ingest::{
    build_label_subset, filter_records, load_dataset, save_dataset, Dataset, EmbeddingRecord,
    LabelRanking, LabelSubset,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/records.md")]
    mod records {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/prototypes.md")]
    mod prototypes {}
    #[doc = include_str!("../../../book/src/clustering.md")]
    mod clustering {}
    #[doc = include_str!("../../../book/src/purity.md")]
    mod purity {}
    #[doc = include_str!("../../../book/src/change.md")]
    mod change {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
