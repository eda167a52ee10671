use ndarray::{Array1, Array2};

use super::{Result, SampleSet, SamplerError};
use crate::Scalar;

/// Second- and first-order statistics of joint RBM states.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseStatistics<T> {
    /// `⟨v hᵀ⟩`, visible × hidden
    pub vh: Array2<T>,
    pub v: Array1<T>,
    pub h: Array1<T>,
}

/// Occurrence-weighted means of the sampled joint states, with each
/// assignment laid out as visible units followed by hidden units.
pub fn negative_phase<T: Scalar>(samples: &SampleSet<T>, n_visible: usize, n_hidden: usize) -> Result<PhaseStatistics<T>> {
    if samples.is_empty() || samples.num_reads() == 0 {
        return Err(SamplerError::EmptySampleSet);
    }
    let mut vh = Array2::zeros((n_visible, n_hidden));
    let mut v = Array1::zeros(n_visible);
    let mut h = Array1::zeros(n_hidden);
    for (x, &count) in samples.assignments.iter().zip(&samples.occurrences) {
        if x.len() != n_visible + n_hidden {
            return Err(SamplerError::AssignmentLength {
                expected: n_visible + n_hidden,
                got: x.len(),
            });
        }
        let w = T::from_u64(count).unwrap();
        let (xv, xh) = x.split_at(n_visible);
        for (i, &vi) in xv.iter().enumerate() {
            if vi == 1 {
                v[i] += w;
                for (j, &hj) in xh.iter().enumerate() {
                    if hj == 1 {
                        vh[[i, j]] += w;
                    }
                }
            }
        }
        for (j, &hj) in xh.iter().enumerate() {
            if hj == 1 {
                h[j] += w;
            }
        }
    }
    let total = T::from_u64(samples.num_reads()).unwrap();
    vh.mapv_inplace(|x| x / total);
    v.mapv_inplace(|x| x / total);
    h.mapv_inplace(|x| x / total);
    Ok(PhaseStatistics { vh, v, h })
}
