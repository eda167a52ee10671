use serde::{Deserialize, Serialize};

use super::{contingency, ContingencyTable, MetricError, Result};
use crate::Scalar;

fn entropy<T: Scalar>(totals: &[u64], n: u64) -> T {
    let n = T::from_u64(n).unwrap();
    let mut h = T::zero();
    for &t in totals.iter().filter(|&&t| t > 0) {
        let p = T::from_u64(t).unwrap() / n;
        h -= p * p.ln();
    }
    h
}

/// Fraction of class entropy explained by the clustering: 1 − H(C|K)/H(C).
///
/// A single true class yields 1.
pub fn homogeneity<T: Scalar>(table: &ContingencyTable) -> T {
    let h_c = entropy::<T>(&table.class_totals(), table.n());
    if h_c == T::zero() {
        return T::one();
    }
    let n = T::from_u64(table.n()).unwrap();
    let cluster_totals = table.cluster_totals();
    let mut h_c_given_k = T::zero();
    for row in table.rows() {
        for (&count, &total) in row.iter().zip(&cluster_totals) {
            if count > 0 {
                let count = T::from_u64(count).unwrap();
                h_c_given_k -= count / n * (count / T::from_u64(total).unwrap()).ln();
            }
        }
    }
    (T::one() - h_c_given_k / h_c).max(T::zero()).min(T::one())
}

/// 1 − H(K|C)/H(K); a single predicted cluster yields 1.
pub fn completeness<T: Scalar>(table: &ContingencyTable) -> T {
    homogeneity(&table.transposed())
}

/// Weighted harmonic combination `(1+β)·h·c / (β·h + c)`.
///
/// `beta = 0` reduces to homogeneity, `beta = 1` to the harmonic mean.
pub fn v_measure<T: Scalar>(h: T, c: T, beta: T) -> Result<T> {
    if !(beta >= T::zero() && beta <= T::one()) {
        return Err(MetricError::BetaOutOfRange(beta.as_f64()));
    }
    let denom = beta * h + c;
    if denom == T::zero() {
        return Ok(T::zero());
    }
    Ok((T::one() + beta) * h * c / denom)
}

#[inline]
fn pairs(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

struct PairCounts {
    both: u64,
    same_class: u64,
    same_cluster: u64,
    total: u64,
}

fn pair_counts(table: &ContingencyTable) -> Result<PairCounts> {
    if table.n() < 2 {
        return Err(MetricError::TooFewSamples(table.n() as usize));
    }
    Ok(PairCounts {
        both: table.rows().flatten().map(|&c| pairs(c)).sum(),
        same_class: table.class_totals().into_iter().map(pairs).sum(),
        same_cluster: table.cluster_totals().into_iter().map(pairs).sum(),
        total: pairs(table.n()),
    })
}

/// Fraction of sample pairs on which the two partitions agree.
pub fn rand_score<T: Scalar>(table: &ContingencyTable) -> Result<T> {
    let p = pair_counts(table)?;
    let agree = p.total + 2 * p.both - p.same_class - p.same_cluster;
    Ok(T::from_u64(agree).unwrap() / T::from_u64(p.total).unwrap())
}

/// Chance-corrected Rand index. Returns 0 when the expected and maximal
/// index coincide (both partitions trivial).
///
/// `(index − expected) / (max − expected)` is scaled by `2·total` so that
/// numerator and denominator are integers; the only rounding is the final
/// division.
pub fn adjusted_rand<T: Scalar>(table: &ContingencyTable) -> Result<T> {
    let p = pair_counts(table)?;
    let (both, sa, sb, total) = (p.both as i128, p.same_class as i128, p.same_cluster as i128, p.total as i128);
    let num = 2 * (both * total - sa * sb);
    let den = total * (sa + sb) - 2 * sa * sb;
    if den == 0 {
        return Ok(T::zero());
    }
    let cast = |v: i128| T::from(v).expect("pair counts fit the scalar range");
    Ok(cast(num) / cast(den))
}

/// The four partition scores reported for every segmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringScores {
    pub homogeneity: f64,
    pub completeness: f64,
    pub adjusted_rand: f64,
    pub rand: f64,
}

impl ClusteringScores {
    pub fn compute<A: Ord + Clone, B: Ord + Clone>(truth: &[A], pred: &[B]) -> Result<Self> {
        let table = contingency(truth, pred)?;
        Ok(Self {
            homogeneity: homogeneity(&table),
            completeness: completeness(&table),
            adjusted_rand: adjusted_rand(&table)?,
            rand: rand_score(&table)?,
        })
    }

    pub fn v_measure(&self, beta: f64) -> Result<f64> {
        v_measure(self.homogeneity, self.completeness, beta)
    }

    pub const FIELDS: [&'static str; 4] = ["homogeneity", "completeness", "ars", "rand_score"];

    pub fn values(&self) -> [f64; 4] {
        [
            self.homogeneity,
            self.completeness,
            self.adjusted_rand,
            self.rand,
        ]
    }
}
