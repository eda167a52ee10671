use std::collections::BTreeMap;

use super::{MetricError, Result};

/// Class × cluster co-occurrence counts.
///
/// Rows follow the sorted order of the distinct true labels, columns the
/// sorted order of the distinct predicted labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    classes: usize,
    clusters: usize,
    counts: Vec<u64>,
    n: u64,
}

impl ContingencyTable {
    /// Builds a table from raw counts in row-major order.
    pub fn from_counts(classes: usize, clusters: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != classes * clusters {
            return Err(MetricError::LengthMismatch {
                left: counts.len(),
                right: classes * clusters,
            });
        }
        let n = counts.iter().sum();
        if n == 0 {
            return Err(MetricError::Empty);
        }
        Ok(Self {
            classes,
            clusters,
            counts,
            n,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn get(&self, class: usize, cluster: usize) -> u64 {
        self.counts[class * self.clusters + cluster]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> {
        self.counts.chunks(self.clusters)
    }

    pub fn class_totals(&self) -> Vec<u64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    pub fn cluster_totals(&self) -> Vec<u64> {
        let mut totals = vec![0u64; self.clusters];
        for row in self.rows() {
            for (t, &c) in totals.iter_mut().zip(row) {
                *t += c;
            }
        }
        totals
    }

    /// Swaps the roles of classes and clusters.
    pub fn transposed(&self) -> Self {
        let mut counts = vec![0u64; self.counts.len()];
        for c in 0..self.classes {
            for k in 0..self.clusters {
                counts[k * self.classes + c] = self.get(c, k);
            }
        }
        Self {
            classes: self.clusters,
            clusters: self.classes,
            counts,
            n: self.n,
        }
    }
}

fn dense_ids<L: Ord + Clone>(labels: &[L]) -> (Vec<usize>, usize) {
    let mut ids: BTreeMap<L, usize> = BTreeMap::new();
    for l in labels {
        ids.entry(l.clone()).or_insert(0);
    }
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    (labels.iter().map(|l| ids[l]).collect(), ids.len())
}

/// Cross-tabulates two labelings of the same samples.
pub fn contingency<A, B>(true_labels: &[A], pred_labels: &[B]) -> Result<ContingencyTable>
where
    A: Ord + Clone,
    B: Ord + Clone,
{
    if true_labels.len() != pred_labels.len() {
        return Err(MetricError::LengthMismatch {
            left: true_labels.len(),
            right: pred_labels.len(),
        });
    }
    if true_labels.is_empty() {
        return Err(MetricError::Empty);
    }
    let (rows, classes) = dense_ids(true_labels);
    let (cols, clusters) = dense_ids(pred_labels);
    let mut counts = vec![0u64; classes * clusters];
    for (&r, &c) in rows.iter().zip(&cols) {
        counts[r * clusters + c] += 1;
    }
    ContingencyTable::from_counts(classes, clusters, counts)
}
