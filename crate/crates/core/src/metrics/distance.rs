use super::{MetricError, Result};
use crate::Scalar;

/// √Σ(x−y)². Panics if the slices differ in length.
pub fn euclidean<T: Scalar>(x: &[T], y: &[T]) -> T {
    assert_eq!(x.len(), y.len(), "euclidean: length mismatch");
    x.iter()
        .zip(y)
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum::<T>()
        .sqrt()
}

/// Angle in radians between two spectra: arccos of their cosine similarity,
/// with the cosine clamped to [−1, 1]. Scale invariant.
pub fn spectral_angle<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(MetricError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let mut dot = T::zero();
    let mut nx = T::zero();
    let mut ny = T::zero();
    for (&a, &b) in x.iter().zip(y) {
        dot += a * b;
        nx += a * a;
        ny += b * b;
    }
    if nx == T::zero() || ny == T::zero() {
        return Err(MetricError::ZeroVector);
    }
    let cos = dot / (nx.sqrt() * ny.sqrt());
    Ok(cos.max(-T::one()).min(T::one()).acos())
}
