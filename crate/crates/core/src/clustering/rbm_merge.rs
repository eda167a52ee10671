use std::collections::BTreeMap;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::distance::hamming;
use super::{ahc, ClusterError, Dendrogram, DistanceMatrix, Linkage, Result};
use crate::metrics::{euclidean, spectral_angle};
use crate::rbm::BinaryLabel;
use crate::Scalar;

/// How the distance between two RBM label groups is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RbmDistanceMode {
    /// Bits in which the two labels differ.
    #[default]
    #[serde(alias = "hamming")]
    HammingLabels,
    /// Euclidean distance between the mean spectra of the member pixels.
    #[serde(alias = "euclidean")]
    CentroidEuclidean,
    /// Spectral angle between the mean spectra of the member pixels.
    #[serde(alias = "sad")]
    CentroidSad,
}

impl FromStr for RbmDistanceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hamming" | "hamming_labels" => Ok(Self::HammingLabels),
            "euclidean" | "centroid_euclidean" => Ok(Self::CentroidEuclidean),
            "sad" | "centroid_sad" => Ok(Self::CentroidSad),
            other => Err(format!("unknown RBM distance mode `{other}`")),
        }
    }
}

/// Distinct RBM labels (sorted) with the distance matrix between them.
#[derive(Debug, Clone)]
pub struct RbmClusters<T> {
    pub labels: Vec<BinaryLabel>,
    /// Index into `labels` for every pixel.
    pub assignment: Vec<usize>,
    pub distances: DistanceMatrix<T>,
}

/// Groups pixels by RBM label and measures the distance between groups.
///
/// `pixels` holds one spectrum per row, aligned with `pixel_labels`; it is
/// only read by the centroid modes.
pub fn rbm_cluster_distance<T: Scalar>(
    pixel_labels: &[BinaryLabel],
    pixels: ArrayView2<T>,
    mode: RbmDistanceMode,
) -> Result<RbmClusters<T>> {
    if mode != RbmDistanceMode::HammingLabels && pixels.nrows() != pixel_labels.len() {
        return Err(ClusterError::Shape(format!(
            "{} labels for {} pixels",
            pixel_labels.len(),
            pixels.nrows()
        )));
    }
    let mut index: BTreeMap<&BinaryLabel, usize> = pixel_labels.iter().map(|l| (l, 0)).collect();
    if index.len() < 2 {
        return Err(ClusterError::TooFewClusters(index.len()));
    }
    for (i, v) in index.values_mut().enumerate() {
        *v = i;
    }
    let labels: Vec<BinaryLabel> = index.keys().map(|&l| l.clone()).collect();
    let assignment: Vec<usize> = pixel_labels.iter().map(|l| index[l]).collect();
    let m = labels.len();

    let distances = match mode {
        RbmDistanceMode::HammingLabels => DistanceMatrix::from_fn(m, |i, j| {
            T::from_count(hamming(&labels[i].bits, &labels[j].bits))
        })?,
        RbmDistanceMode::CentroidEuclidean | RbmDistanceMode::CentroidSad => {
            let mut sums = Array2::<T>::zeros((m, pixels.ncols()));
            let mut counts = vec![0usize; m];
            for (x, &c) in pixels.rows().into_iter().zip(&assignment) {
                let mut row = sums.row_mut(c);
                row += &x;
                counts[c] += 1;
            }
            let centroids: Vec<Vec<T>> = sums
                .rows()
                .into_iter()
                .zip(&counts)
                .map(|(s, &c)| s.iter().map(|&v| v / T::from_count(c)).collect())
                .collect();
            if mode == RbmDistanceMode::CentroidEuclidean {
                DistanceMatrix::from_fn(m, |i, j| euclidean(&centroids[i], &centroids[j]))?
            } else {
                if let Some(i) = centroids.iter().position(|c| c.iter().all(|&x| x == T::zero())) {
                    return Err(ClusterError::ZeroVector(i));
                }
                DistanceMatrix::from_fn(m, |i, j| {
                    spectral_angle(&centroids[i], &centroids[j]).expect("non-zero centroids")
                })?
            }
        }
    };
    Ok(RbmClusters {
        labels,
        assignment,
        distances,
    })
}

/// Runs AHC over the RBM label groups and maps every pixel to the final
/// cluster of its label.
pub fn merge_rbm_clusters<T: Scalar>(
    clusters: &RbmClusters<T>,
    linkage: Linkage,
    target_k: usize,
) -> Result<(Vec<usize>, Dendrogram<T>)> {
    let k = target_k.min(clusters.labels.len());
    let (group_labels, dendrogram) = ahc(&clusters.distances, linkage, k)?;
    let pixel_labels = clusters.assignment.iter().map(|&g| group_labels[g]).collect();
    Ok((pixel_labels, dendrogram))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{adjusted_rand, contingency};
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn label(bits: &[u8]) -> BinaryLabel {
        BinaryLabel { bits: bits.to_vec() }
    }

    #[test]
    fn hamming_between_two_labels() {
        let l = [label(&[0, 0, 0]), label(&[0, 0, 1]), label(&[0, 0, 0])];
        let c = rbm_cluster_distance::<f64>(&l, Array2::zeros((0, 1)).view(), RbmDistanceMode::HammingLabels).unwrap();
        assert_eq!(c.labels.len(), 2);
        assert_eq!(c.assignment, [0, 1, 0]);
        assert_eq!(c.distances.get(0, 1), 1.0);
    }

    #[test]
    fn identical_centroids_are_at_zero() {
        let l = [label(&[0]), label(&[0]), label(&[1]), label(&[1])];
        let px = array![[1.0, 3.0], [3.0, 1.0], [2.0, 2.0], [2.0, 2.0]];
        let c = rbm_cluster_distance(&l, px.view(), RbmDistanceMode::CentroidEuclidean).unwrap();
        assert_eq!(c.distances.get(0, 1), 0.0);
    }

    #[test]
    fn single_label_is_rejected() {
        let l = [label(&[1, 0]), label(&[1, 0])];
        assert!(matches!(
            rbm_cluster_distance::<f64>(&l, Array2::zeros((2, 1)).view(), RbmDistanceMode::HammingLabels),
            Err(ClusterError::TooFewClusters(1))
        ));
    }

    #[test]
    fn centroid_matrix_matches_direct_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 60;
        let l: Vec<BinaryLabel> = (0..n)
            .map(|_| label(&[rng.random_range(0..=1), rng.random_range(0..=1), rng.random_range(0..=1)]))
            .collect();
        let px = Array2::from_shape_simple_fn((n, 4), || rng.random_range(0.1..1.0));
        for mode in [RbmDistanceMode::CentroidEuclidean, RbmDistanceMode::CentroidSad] {
            let c = rbm_cluster_distance(&l, px.view(), mode).unwrap();
            for a in 0..c.labels.len() {
                assert_eq!(c.distances.get(a, a), 0.0);
                for b in 0..c.labels.len() {
                    assert_eq!(c.distances.get(a, b), c.distances.get(b, a));
                    let mean = |lab: &BinaryLabel| {
                        let rows: Vec<usize> = (0..n).filter(|&i| &l[i] == lab).collect();
                        (0..4)
                            .map(|d| rows.iter().map(|&i| px[[i, d]]).sum::<f64>() / rows.len() as f64)
                            .collect::<Vec<_>>()
                    };
                    let (ma, mb) = (mean(&c.labels[a]), mean(&c.labels[b]));
                    let direct = match mode {
                        RbmDistanceMode::CentroidEuclidean => euclidean(&ma, &mb),
                        _ => spectral_angle(&ma, &mb).unwrap(),
                    };
                    if a != b {
                        assert!((c.distances.get(a, b) - direct).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn seven_labels_with_target_seven_is_a_bijection() {
        let l: Vec<BinaryLabel> = (0..21).map(|i| label(&[(i % 7 >> 2) as u8 & 1, (i % 7 >> 1) as u8 & 1, (i % 7) as u8 & 1])).collect();
        let c = rbm_cluster_distance::<f64>(&l, Array2::zeros((0, 1)).view(), RbmDistanceMode::HammingLabels).unwrap();
        let (final_labels, dend) = merge_rbm_clusters(&c, Linkage::Average, 7).unwrap();
        assert!(dend.merges.is_empty());
        let ars: f64 = adjusted_rand(&contingency(&l, &final_labels).unwrap()).unwrap();
        assert_eq!(ars, 1.0);
    }

    #[test]
    fn many_labels_reduce_to_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let l: Vec<BinaryLabel> = (0..400)
            .map(|_| label(&(0..8).map(|_| rng.random_range(0..=1)).collect::<Vec<u8>>()))
            .collect();
        let c = rbm_cluster_distance::<f64>(&l, Array2::zeros((0, 1)).view(), RbmDistanceMode::HammingLabels).unwrap();
        assert!(c.labels.len() >= 40);
        let (final_labels, _) = merge_rbm_clusters(&c, Linkage::Complete, 7).unwrap();
        let mut d = final_labels.clone();
        d.sort();
        d.dedup();
        assert!(d.len() <= 7);
    }

    #[test]
    fn one_bit_pair_merges_first() {
        let l = [
            label(&[0, 0, 0, 0, 0, 0]),
            label(&[0, 0, 0, 0, 0, 1]),
            label(&[1, 1, 1, 0, 0, 0]),
            label(&[0, 0, 1, 1, 1, 1]),
        ];
        let c = rbm_cluster_distance::<f64>(&l, Array2::zeros((0, 1)).view(), RbmDistanceMode::HammingLabels).unwrap();
        let (_, dend) = merge_rbm_clusters(&c, Linkage::Average, 1).unwrap();
        let first = dend.merges[0];
        let pair = [&c.labels[first.a], &c.labels[first.b]];
        assert!(pair.contains(&&l[0]) && pair.contains(&&l[1]));
        assert_eq!(first.distance, 1.0);
    }
}
