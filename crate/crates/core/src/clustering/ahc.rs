use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ClusterError, DistanceMatrix, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    /// Largest pairwise distance between members.
    Complete,
    /// Unweighted mean pairwise distance between members.
    Average,
}

impl FromStr for Linkage {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "complete" => Ok(Self::Complete),
            "average" => Ok(Self::Average),
            other => Err(format!("unknown linkage `{other}`")),
        }
    }
}

/// One agglomeration step. Leaves are clusters `0..n`; the cluster created
/// by step `s` has id `n + s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge<T> {
    /// Smaller of the two merged ids.
    pub a: usize,
    pub b: usize,
    pub distance: T,
    pub new_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram<T> {
    pub n_leaves: usize,
    pub merges: Vec<Merge<T>>,
}

impl<T: Scalar> Dendrogram<T> {
    /// Writes `step,a,b,distance,new_id`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    pub(crate) fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["step", "a", "b", "distance", "new_id"])?;
        for (s, m) in self.merges.iter().enumerate() {
            w.write_record(&[
                s.to_string(),
                m.a.to_string(),
                m.b.to_string(),
                m.distance.to_string(),
                m.new_id.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Candidate merge ordered by distance, then by the (smaller, larger) id pair.
#[derive(Clone, Copy)]
struct Candidate<T> {
    distance: T,
    lo: usize,
    hi: usize,
    other: usize,
}

impl<T: Scalar> Candidate<T> {
    fn before(&self, o: &Self) -> bool {
        match self.distance.partial_cmp(&o.distance).expect("finite distances") {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => (self.lo, self.hi) < (o.lo, o.hi),
        }
    }
}

struct Working<T> {
    n: usize,
    /// Complete: current linkage distance. Average: sum of member-pair
    /// distances, so that every update is a plain addition.
    d: Vec<T>,
    ids: Vec<usize>,
    sizes: Vec<usize>,
    active: Vec<bool>,
    linkage: Linkage,
}

impl<T: Scalar> Working<T> {
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n + j
    }

    fn distance(&self, i: usize, j: usize) -> T {
        let v = self.d[self.idx(i, j)];
        match self.linkage {
            Linkage::Complete => v,
            Linkage::Average => v / T::from_count(self.sizes[i] * self.sizes[j]),
        }
    }

    fn candidate(&self, i: usize, j: usize) -> Candidate<T> {
        let (a, b) = (self.ids[i], self.ids[j]);
        Candidate {
            distance: self.distance(i, j),
            lo: a.min(b),
            hi: a.max(b),
            other: j,
        }
    }

    fn row_best(&self, i: usize) -> Option<Candidate<T>> {
        let mut best: Option<Candidate<T>> = None;
        for j in (0..self.n).filter(|&j| j != i && self.active[j]) {
            let c = self.candidate(i, j);
            if best.as_ref().is_none_or(|b| c.before(b)) {
                best = Some(c);
            }
        }
        best
    }
}

/// Agglomerative clustering down to `target_k` clusters.
///
/// Each step merges the closest pair of clusters under `linkage`; equal
/// distances go to the lexicographically smallest `(a, b)` id pair. Returns
/// per-point labels numbered by first appearance (point 0 is in cluster 0)
/// and the merges performed.
pub fn ahc<T: Scalar>(dist: &DistanceMatrix<T>, linkage: Linkage, target_k: usize) -> Result<(Vec<usize>, Dendrogram<T>)> {
    let n = dist.n();
    if target_k == 0 || target_k > n {
        return Err(ClusterError::InvalidK { k: target_k, n });
    }
    let mut d = vec![T::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            d[i * n + j] = dist.get(i, j);
        }
    }
    let mut w = Working {
        n,
        d,
        ids: (0..n).collect(),
        sizes: vec![1; n],
        active: vec![true; n],
        linkage,
    };
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut best: Vec<Option<Candidate<T>>> = (0..n).map(|i| w.row_best(i)).collect();
    let mut merges = Vec::with_capacity(n - target_k);

    for step in 0..n - target_k {
        let (s, c) = (0..n)
            .filter(|&i| w.active[i])
            .filter_map(|i| best[i].map(|c| (i, c)))
            .reduce(|x, y| if y.1.before(&x.1) { y } else { x })
            .expect("at least two active clusters");
        let (keep, gone) = (s.min(c.other), s.max(c.other));
        merges.push(Merge {
            a: c.lo,
            b: c.hi,
            distance: c.distance,
            new_id: n + step,
        });

        w.active[gone] = false;
        for k in (0..n).filter(|&k| w.active[k] && k != keep) {
            let (ik, gk) = (w.idx(keep, k), w.idx(gone, k));
            w.d[ik] = match linkage {
                Linkage::Complete => w.d[ik].max(w.d[gk]),
                Linkage::Average => w.d[ik] + w.d[gk],
            };
        }
        w.sizes[keep] += w.sizes[gone];
        w.ids[keep] = n + step;
        let moved = std::mem::take(&mut members[gone]);
        members[keep].extend(moved);
        best[gone] = None;

        best[keep] = w.row_best(keep);
        for k in (0..n).filter(|&k| w.active[k] && k != keep) {
            let stale = best[k].is_none_or(|b| b.other == keep || b.other == gone);
            if stale {
                best[k] = w.row_best(k);
            } else {
                let cand = w.candidate(k, keep);
                if best[k].as_ref().is_some_and(|b| cand.before(b)) {
                    best[k] = Some(cand);
                }
            }
        }
    }

    let mut labels = vec![usize::MAX; n];
    let mut roots: Vec<usize> = (0..n).filter(|&i| w.active[i]).collect();
    roots.sort_by_key(|&r| members[r].iter().min().copied());
    for (label, &r) in roots.iter().enumerate() {
        for &p in &members[r] {
            labels[p] = label;
        }
    }
    Ok((labels, Dendrogram { n_leaves: n, merges }))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Recomputes every inter-cluster distance from the original matrix at
    /// every step.
    pub(crate) fn naive_ahc(dist: &DistanceMatrix<f64>, linkage: Linkage, target_k: usize) -> Vec<Merge<f64>> {
        let n = dist.n();
        let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
        let mut merges = Vec::new();
        let mut next = n;
        while clusters.len() > target_k {
            let mut best: Option<(f64, usize, usize, usize, usize)> = None;
            for x in 0..clusters.len() {
                for y in x + 1..clusters.len() {
                    let (ia, ma) = &clusters[x];
                    let (ib, mb) = &clusters[y];
                    let pair: Vec<f64> = ma.iter().flat_map(|&p| mb.iter().map(move |&q| (p, q))).map(|(p, q)| dist.get(p, q)).collect();
                    let d = match linkage {
                        Linkage::Complete => pair.iter().copied().fold(0.0, f64::max),
                        Linkage::Average => pair.iter().sum::<f64>() / pair.len() as f64,
                    };
                    let (lo, hi) = ((*ia).min(*ib), (*ia).max(*ib));
                    let better = match best {
                        None => true,
                        Some((bd, blo, bhi, _, _)) => d < bd || (d == bd && (lo, hi) < (blo, bhi)),
                    };
                    if better {
                        best = Some((d, lo, hi, x, y));
                    }
                }
            }
            let (d, lo, hi, x, y) = best.unwrap();
            let mb = clusters.remove(y).1;
            let (_, ma) = clusters.remove(x);
            clusters.push((next, ma.into_iter().chain(mb).collect()));
            merges.push(Merge {
                a: lo,
                b: hi,
                distance: d,
                new_id: next,
            });
            next += 1;
        }
        merges
    }

    pub(crate) fn integer_matrix(n: usize, max: u32, rng: &mut ChaCha8Rng) -> DistanceMatrix<f64> {
        let v = (0..n * (n - 1) / 2).map(|_| f64::from(rng.random_range(1..=max))).collect();
        DistanceMatrix::from_condensed(n, v).unwrap()
    }

    #[test]
    fn line_example() {
        let d = DistanceMatrix::from_fn(3, |i, j| {
            let x = [0.0f64, 1.0, 10.0];
            (x[i] - x[j]).abs()
        })
        .unwrap();
        let (labels, dend) = ahc(&d, Linkage::Complete, 2).unwrap();
        assert_eq!(labels, [0, 0, 1]);
        assert_eq!(dend.merges.len(), 1);
        assert_eq!((dend.merges[0].a, dend.merges[0].b, dend.merges[0].new_id), (0, 1, 3));
    }

    #[test]
    fn identity_when_k_equals_n() {
        let d = DistanceMatrix::from_fn(4, |i, j| (i + j) as f64).unwrap();
        let (labels, dend) = ahc(&d, Linkage::Average, 4).unwrap();
        assert_eq!(labels, [0, 1, 2, 3]);
        assert!(dend.merges.is_empty());
        assert!(matches!(ahc(&d, Linkage::Average, 0), Err(ClusterError::InvalidK { .. })));
        assert!(matches!(ahc(&d, Linkage::Average, 5), Err(ClusterError::InvalidK { .. })));
    }

    #[test]
    fn full_tree_has_n_minus_one_merges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = integer_matrix(12, 5, &mut rng);
        for linkage in [Linkage::Complete, Linkage::Average] {
            let (labels, dend) = ahc(&d, linkage, 1).unwrap();
            assert!(labels.iter().all(|&l| l == 0));
            assert_eq!(dend.merges.len(), 11);
            assert!(dend.merges.windows(2).all(|w| w[1].distance >= w[0].distance));
        }
    }

    #[test]
    fn ties_break_on_smallest_pair() {
        // all distances equal: merges go (0,1)->4, (2,3)->5, (4,5)->6
        let d = DistanceMatrix::from_fn(4, |_, _| 1.0).unwrap();
        let (_, dend) = ahc(&d, Linkage::Complete, 1).unwrap();
        let pairs: Vec<_> = dend.merges.iter().map(|m| (m.a, m.b)).collect();
        assert_eq!(pairs, [(0, 1), (2, 3), (4, 5)]);
    }

    #[test]
    fn matches_naive_reference_on_tied_integers() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let d = integer_matrix(15, 4, &mut rng);
            for linkage in [Linkage::Complete, Linkage::Average] {
                assert_eq!(ahc(&d, linkage, 1).unwrap().1.merges, naive_ahc(&d, linkage, 1));
            }
        }
    }

    #[test]
    fn dendrogram_csv() {
        let d = DistanceMatrix::from_fn(3, |i, j| (i + j) as f64).unwrap();
        let (_, dend) = ahc(&d, Linkage::Complete, 1).unwrap();
        let mut buf = Vec::new();
        dend.write_to(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "step,a,b,distance,new_id\n0,0,1,1,3\n1,2,3,3,4\n"
        );
    }
}
