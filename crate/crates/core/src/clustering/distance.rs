use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ClusterError, Result};
use crate::metrics::{euclidean, spectral_angle};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    SpectralAngle,
    /// Number of coordinates that differ.
    Hamming,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "euclidean" => Ok(Self::Euclidean),
            "spectral_angle" | "sad" => Ok(Self::SpectralAngle),
            "hamming" => Ok(Self::Hamming),
            other => Err(format!("unknown metric `{other}`")),
        }
    }
}

/// Symmetric matrix with zero diagonal, stored as the strict upper triangle
/// in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    n: usize,
    upper: Vec<T>,
}

#[inline]
fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

impl<T: Scalar> DistanceMatrix<T> {
    /// Builds the matrix from `f(i, j)` for `i < j`, checking that every
    /// entry is finite and non-negative.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T + Sync) -> Result<Self> {
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| f(i, j)).collect())
            .collect();
        Self::from_condensed(n, rows.concat())
    }

    pub fn from_condensed(n: usize, upper: Vec<T>) -> Result<Self> {
        if upper.len() != n * n.saturating_sub(1) / 2 {
            return Err(ClusterError::Shape(format!(
                "{} condensed entries for {n} points",
                upper.len()
            )));
        }
        if let Some(bad) = upper.iter().find(|d| !d.is_finite() || **d < T::zero()) {
            return Err(ClusterError::InvalidDistance(bad.as_f64()));
        }
        Ok(Self { n, upper })
    }

    /// Checks a full square matrix for symmetry (within `1e-12`), a zero
    /// diagonal and non-negative finite entries.
    pub fn from_square(values: ArrayView2<T>) -> Result<Self> {
        let n = values.nrows();
        if values.ncols() != n {
            return Err(ClusterError::Shape(format!("{}x{} matrix is not square", n, values.ncols())));
        }
        let tol = T::lit(1e-12);
        for i in 0..n {
            if values[[i, i]] != T::zero() {
                return Err(ClusterError::Shape(format!("non-zero diagonal at {i}")));
            }
            for j in i + 1..n {
                if (values[[i, j]] - values[[j, i]]).abs() > tol {
                    return Err(ClusterError::Shape(format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        Self::from_fn(n, |i, j| values[[i, j]])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => T::zero(),
            std::cmp::Ordering::Less => self.upper[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.upper[condensed_index(self.n, j, i)],
        }
    }

    pub fn condensed(&self) -> &[T] {
        &self.upper
    }

    /// Writes `i,j,distance` for every `i < j`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        self.write_to(std::fs::File::create(path)?)
    }

    pub(crate) fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "distance"])?;
        for i in 0..self.n {
            for j in i + 1..self.n {
                w.write_record(&[i.to_string(), j.to_string(), self.get(i, j).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn hamming<T: PartialEq>(x: &[T], y: &[T]) -> usize {
    x.iter().zip(y).filter(|(a, b)| a != b).count()
}

/// Distances between every pair of rows.
pub fn pairwise_distances<T: Scalar>(data: ArrayView2<T>, metric: Metric) -> Result<DistanceMatrix<T>> {
    let n = data.nrows();
    if n == 0 {
        return Err(ClusterError::Empty);
    }
    let rows: Vec<Vec<T>> = data.rows().into_iter().map(|r| r.to_vec()).collect();
    if metric == Metric::SpectralAngle {
        if let Some(i) = rows.iter().position(|r| r.iter().all(|&x| x == T::zero())) {
            return Err(ClusterError::ZeroVector(i));
        }
    }
    DistanceMatrix::from_fn(n, |i, j| match metric {
        Metric::Euclidean => euclidean(&rows[i], &rows[j]),
        Metric::SpectralAngle => spectral_angle(&rows[i], &rows[j]).expect("rows checked non-zero"),
        Metric::Hamming => T::from_count(hamming(&rows[i], &rows[j])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn condensed_layout() {
        let d = DistanceMatrix::from_fn(4, |i, j| (10 * i + j) as f64).unwrap();
        assert_eq!(d.condensed(), &[1.0, 2.0, 3.0, 12.0, 13.0, 23.0]);
        assert_eq!(d.get(3, 1), 13.0);
        assert_eq!(d.get(2, 2), 0.0);
    }

    #[test]
    fn identical_rows_are_at_zero() {
        let x = array![[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]];
        for m in [Metric::Euclidean, Metric::SpectralAngle, Metric::Hamming] {
            assert_eq!(pairwise_distances(x.view(), m).unwrap().get(0, 1), 0.0);
        }
    }

    #[test]
    fn collinear_and_orthogonal() {
        let x = array![[1.0, 2.0, 2.0], [2.0, 4.0, 4.0]];
        assert!(pairwise_distances(x.view(), Metric::SpectralAngle).unwrap().get(0, 1) < 1e-7);
        assert_eq!(pairwise_distances(x.view(), Metric::Euclidean).unwrap().get(0, 1), 3.0);
        let e = array![[1.0, 0.0], [0.0, 1.0]];
        let sad = pairwise_distances(e.view(), Metric::SpectralAngle).unwrap().get(0, 1);
        assert!((sad - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(pairwise_distances(e.view(), Metric::Hamming).unwrap().get(0, 1), 2.0);
    }

    #[test]
    fn errors() {
        let z = array![[0.0, 0.0], [1.0, 0.0]];
        assert!(matches!(
            pairwise_distances(z.view(), Metric::SpectralAngle),
            Err(ClusterError::ZeroVector(0))
        ));
        assert!(matches!(
            pairwise_distances(Array2::<f64>::zeros((0, 3)).view(), Metric::Euclidean),
            Err(ClusterError::Empty)
        ));
        assert!(DistanceMatrix::from_square(array![[0.0, 1.0], [2.0, 0.0]].view()).is_err());
        assert!(DistanceMatrix::from_square(array![[1.0, 1.0], [1.0, 0.0]].view()).is_err());
        assert!(DistanceMatrix::from_condensed(3, vec![1.0, -1.0, 2.0]).is_err());
    }

    #[test]
    fn csv_export() {
        let d = DistanceMatrix::from_fn(3, |i, j| (i + j) as f64).unwrap();
        let mut buf = Vec::new();
        d.write_to(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "i,j,distance\n0,1,1\n0,2,2\n1,2,3\n");
    }
}
