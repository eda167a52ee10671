//! k-means baseline, agglomerative hierarchical clustering, and the merge of
//! RBM label groups into a fixed number of segments.

mod ahc;
mod distance;
mod kmeans;
mod rbm_merge;

pub use ahc::{ahc, Dendrogram, Linkage, Merge};
pub use distance::{pairwise_distances, DistanceMatrix, Metric};
pub use kmeans::{kmeans, kmeans_repeated, KMeansModel, KMeansReport};
pub use rbm_merge::{merge_rbm_clusters, rbm_cluster_distance, RbmClusters, RbmDistanceMode};

use crate::metrics::MetricError;

#[derive(Debug, thiserror::Error)]
pub enum ClusterError {
    #[error("no data to cluster")]
    Empty,
    #[error("k = {k} is invalid for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error("row {0} is a zero vector; spectral angle is undefined")]
    ZeroVector(usize),
    #[error("distance {0} is negative or non-finite")]
    InvalidDistance(f64),
    #[error("need at least 2 distinct RBM labels, got {0}")]
    TooFewClusters(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ClusterError>;
