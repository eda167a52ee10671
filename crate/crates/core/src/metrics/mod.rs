//! Clustering and reconstruction evaluation.
//!
//! Every partition score is derived from a [`ContingencyTable`], so label
//! values only matter through equality: all scores are invariant under
//! renaming of classes or clusters.

mod contingency;
mod distance;
mod scores;

pub use contingency::{contingency, ContingencyTable};
pub use distance::{euclidean, spectral_angle};
pub use scores::{
    adjusted_rand, completeness, homogeneity, rand_score, v_measure, ClusteringScores,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("label sequences differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("cannot score an empty labeling")]
    Empty,
    #[error("pair-counting scores need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("v-measure beta must lie in [0, 1], got {0}")]
    BetaOutOfRange(f64),
    #[error("spectral angle is undefined for a zero vector")]
    ZeroVector,
}

pub type Result<T> = std::result::Result<T, MetricError>;
