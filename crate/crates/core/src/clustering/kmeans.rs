use ndarray::{Array2, ArrayView1, ArrayView2};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClusterError, Result};
use crate::metrics::ClusteringScores;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KMeansModel<T> {
    pub k: usize,
    /// k × bands
    pub centroids: Array2<T>,
    /// Sum of squared distances from each point to its assigned centroid.
    pub inertia: T,
    /// Lloyd iterations run (assignment steps).
    pub iterations: usize,
    /// Inertia after every assignment step.
    pub inertia_trace: Vec<T>,
}

fn sq_dist<T: Scalar>(x: ArrayView1<T>, c: ArrayView1<T>) -> T {
    x.iter().zip(c.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

fn nearest<T: Scalar>(x: ArrayView1<T>, centroids: &Array2<T>) -> (usize, T) {
    let mut best = (0, T::infinity());
    for (j, c) in centroids.rows().into_iter().enumerate() {
        let d = sq_dist(x, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn assign<T: Scalar>(data: ArrayView2<T>, centroids: &Array2<T>) -> Vec<(usize, T)> {
    let rows: Vec<ArrayView1<T>> = data.rows().into_iter().collect();
    rows.par_iter().map(|x| nearest(*x, centroids)).collect()
}

fn plus_plus_init<T: Scalar, R: Rng>(data: ArrayView2<T>, k: usize, rng: &mut R) -> Array2<T> {
    let n = data.nrows();
    let mut centroids = Array2::zeros((k, data.ncols()));
    let first = rng.random_range(0..n);
    centroids.row_mut(0).assign(&data.row(first));
    let mut d2: Vec<f64> = data
        .rows()
        .into_iter()
        .map(|x| sq_dist(x, centroids.row(0)).as_f64())
        .collect();
    for c in 1..k {
        let pick = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every point already coincides with a centroid
            Err(_) => rng.random_range(0..n),
        };
        centroids.row_mut(c).assign(&data.row(pick));
        for (i, x) in data.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, centroids.row(c)).as_f64());
        }
    }
    centroids
}

/// Lloyd's algorithm from k-means++ seeds.
///
/// Iterates until an assignment step leaves every label unchanged or
/// `max_iters` assignment steps have run. Distance ties go to the lower
/// centroid index. A centroid left without points is moved onto the point
/// farthest from its own centroid.
pub fn kmeans<T: Scalar>(data: ArrayView2<T>, k: usize, seed: u64, max_iters: usize) -> Result<(KMeansModel<T>, Vec<usize>)> {
    let n = data.nrows();
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let max_iters = max_iters.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = plus_plus_init(data, k, &mut rng);
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    let mut iterations = 0;
    loop {
        let assigned = assign(data, &centroids);
        let new_labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        trace.push(assigned.iter().map(|a| a.1).sum::<T>());
        iterations += 1;
        let converged = new_labels == labels;
        labels = new_labels;
        if converged || iterations >= max_iters {
            break;
        }

        let mut sums = Array2::<T>::zeros(centroids.dim());
        let mut counts = vec![0usize; k];
        for (x, &l) in data.rows().into_iter().zip(&labels) {
            let mut row = sums.row_mut(l);
            row += &x;
            counts[l] += 1;
        }
        let mut dist: Vec<T> = assigned.iter().map(|a| a.1).collect();
        for j in 0..k {
            if counts[j] > 0 {
                let mean = sums.row(j).mapv(|s| s / T::from_count(counts[j]));
                centroids.row_mut(j).assign(&mean);
                continue;
            }
            let far = (0..n)
                .reduce(|a, b| if dist[b] > dist[a] { b } else { a })
                .expect("non-empty data");
            log::debug!("k-means: cluster {j} empty, reseeding at point {far}");
            centroids.row_mut(j).assign(&data.row(far));
            dist[far] = T::zero();
        }
    }
    let inertia = *trace.last().expect("at least one iteration");
    Ok((
        KMeansModel {
            k,
            centroids,
            inertia,
            iterations,
            inertia_trace: trace,
        },
        labels,
    ))
}

/// Scores of one k-means run per seed, with their mean and (population)
/// standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansReport {
    pub runs: Vec<(u64, ClusteringScores)>,
    pub mean: [f64; 4],
    pub std: [f64; 4],
}

impl KMeansReport {
    pub fn from_runs(runs: Vec<(u64, ClusteringScores)>) -> Self {
        let m = runs.len().max(1) as f64;
        let mut mean = [0.0; 4];
        for (_, s) in &runs {
            for (acc, v) in mean.iter_mut().zip(s.values()) {
                *acc += v / m;
            }
        }
        let mut std = [0.0; 4];
        for (_, s) in &runs {
            for ((acc, v), mu) in std.iter_mut().zip(s.values()).zip(mean) {
                *acc += (v - mu) * (v - mu) / m;
            }
        }
        Self {
            runs,
            mean,
            std: std.map(f64::sqrt),
        }
    }

    /// `metric,mean,std` rows, one per clustering score.
    pub fn summary_rows(&self) -> Vec<(&'static str, f64, f64)> {
        ClusteringScores::FIELDS
            .iter()
            .enumerate()
            .map(|(i, &f)| (f, self.mean[i], self.std[i]))
            .collect()
    }

    /// Human-readable `metric  mean ± std` table.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for (name, mean, std) in self.summary_rows() {
            out.push_str(&format!("{name:<14}{mean:.3} ± {std:.3}\n"));
        }
        out
    }
}

/// Runs k-means once per seed and scores each labeling against `truth`.
pub fn kmeans_repeated<T: Scalar, L: Ord + Clone>(
    data: ArrayView2<T>,
    truth: &[L],
    k: usize,
    seeds: &[u64],
    max_iters: usize,
) -> Result<KMeansReport> {
    if truth.len() != data.nrows() {
        return Err(ClusterError::Shape(format!(
            "{} truth labels for {} points",
            truth.len(),
            data.nrows()
        )));
    }
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let (_, labels) = kmeans(data, k, seed, max_iters)?;
        runs.push((seed, ClusteringScores::compute(truth, &labels)?));
    }
    Ok(KMeansReport::from_runs(runs))
}
