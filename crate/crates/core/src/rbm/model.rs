use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{RbmError, Result};
use crate::Scalar;

/// Bernoulli–Bernoulli restricted Boltzmann machine.
///
/// Energy convention: `E(v, h) = −aᵀv − bᵀh − vᵀWh` with `W` shaped
/// visible × hidden, `a` the visible and `b` the hidden biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmModel<T> {
    pub weights: Array2<T>,
    pub visible_bias: Array1<T>,
    pub hidden_bias: Array1<T>,
}

/// Bits of a hidden-layer label, compared lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryLabel {
    pub bits: Vec<u8>,
}

impl BinaryLabel {
    /// Packs the bits into an integer, first bit most significant.
    pub fn packed(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn hamming(&self, other: &BinaryLabel) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl std::fmt::Display for BinaryLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_binary(bits: &[u8], expected: usize) -> Result<()> {
    if bits.len() != expected {
        return Err(RbmError::LengthMismatch {
            expected,
            got: bits.len(),
        });
    }
    if bits.iter().any(|&b| b > 1) {
        return Err(RbmError::NotBinary);
    }
    Ok(())
}

impl<T: Scalar> RbmModel<T> {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            weights: Array2::zeros((n_visible, n_hidden)),
            visible_bias: Array1::zeros(n_visible),
            hidden_bias: Array1::zeros(n_hidden),
        }
    }

    /// Gaussian weights with standard deviation `sigma`, zero biases.
    pub fn random<R: Rng + ?Sized>(n_visible: usize, n_hidden: usize, sigma: f64, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, sigma).expect("finite sigma");
        let weights = Array2::from_shape_simple_fn((n_visible, n_hidden), || {
            T::lit(normal.sample(rng))
        });
        Self {
            weights,
            visible_bias: Array1::zeros(n_visible),
            hidden_bias: Array1::zeros(n_hidden),
        }
    }

    pub fn from_parts(weights: Array2<T>, visible_bias: Array1<T>, hidden_bias: Array1<T>) -> Result<Self> {
        let (nv, nh) = weights.dim();
        if visible_bias.len() != nv {
            return Err(RbmError::LengthMismatch {
                expected: nv,
                got: visible_bias.len(),
            });
        }
        if hidden_bias.len() != nh {
            return Err(RbmError::LengthMismatch {
                expected: nh,
                got: hidden_bias.len(),
            });
        }
        let model = Self {
            weights,
            visible_bias,
            hidden_bias,
        };
        if !model.is_finite() {
            return Err(RbmError::NonFinite { epoch: 0 });
        }
        Ok(model)
    }

    pub fn n_visible(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_hidden(&self) -> usize {
        self.weights.ncols()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.is_finite())
            && self.visible_bias.iter().all(|w| w.is_finite())
            && self.hidden_bias.iter().all(|w| w.is_finite())
    }

    /// `E(v, h)`, summed term by term: visible biases, hidden biases, then
    /// couplings in visible-major order.
    pub fn energy(&self, v: &[u8], h: &[u8]) -> Result<T> {
        check_binary(v, self.n_visible())?;
        check_binary(h, self.n_hidden())?;
        Ok(self.energy_unchecked(v, h))
    }

    pub(crate) fn energy_unchecked(&self, v: &[u8], h: &[u8]) -> T {
        let mut e = T::zero();
        for (&bit, &a) in v.iter().zip(&self.visible_bias) {
            if bit == 1 {
                e -= a;
            }
        }
        for (&bit, &b) in h.iter().zip(&self.hidden_bias) {
            if bit == 1 {
                e -= b;
            }
        }
        for (i, &vi) in v.iter().enumerate() {
            for (j, &hj) in h.iter().enumerate() {
                if vi == 1 && hj == 1 {
                    e -= self.weights[[i, j]];
                }
            }
        }
        e
    }

    /// `P(h_j = 1 | v) = σ(b_j + Σ_i v_i W_ij)`.
    pub fn hidden_probs(&self, v: &[u8]) -> Result<Vec<T>> {
        check_binary(v, self.n_visible())?;
        Ok(self.hidden_probs_unchecked(v))
    }

    pub(crate) fn hidden_probs_unchecked(&self, v: &[u8]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_hidden()];
        self.fill_hidden_probs(v, &mut out);
        out
    }

    pub(crate) fn fill_hidden_probs(&self, v: &[u8], out: &mut [T]) {
        for (j, o) in out.iter_mut().enumerate() {
            let mut x = self.hidden_bias[j];
            for (i, &vi) in v.iter().enumerate() {
                if vi == 1 {
                    x += self.weights[[i, j]];
                }
            }
            *o = x.sigmoid();
        }
    }

    /// `P(v_i = 1 | h) = σ(a_i + Σ_j W_ij h_j)`.
    pub fn visible_probs(&self, h: &[u8]) -> Result<Vec<T>> {
        check_binary(h, self.n_hidden())?;
        Ok(self.visible_probs_unchecked(h))
    }

    pub(crate) fn visible_probs_unchecked(&self, h: &[u8]) -> Vec<T> {
        let mut out = vec![T::zero(); self.n_visible()];
        self.fill_visible_probs(h, &mut out);
        out
    }

    pub(crate) fn fill_visible_probs(&self, h: &[u8], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut x = self.visible_bias[i];
            for (j, &hj) in h.iter().enumerate() {
                if hj == 1 {
                    x += self.weights[[i, j]];
                }
            }
            *o = x.sigmoid();
        }
    }

    /// Row-wise hidden probabilities for a batch of (possibly real-valued)
    /// visible vectors.
    pub fn hidden_probs_batch(&self, visible: ArrayView2<T>) -> Array2<T> {
        let mut x = visible.dot(&self.weights);
        x += &self.hidden_bias.view().insert_axis(Axis(0));
        x.mapv_inplace(Scalar::sigmoid);
        x
    }

    pub fn visible_probs_batch(&self, hidden: ArrayView2<T>) -> Array2<T> {
        let mut x = hidden.dot(&self.weights.t());
        x += &self.visible_bias.view().insert_axis(Axis(0));
        x.mapv_inplace(Scalar::sigmoid);
        x
    }

    /// Hidden units whose activation probability reaches `threshold` are set.
    pub fn label_pixel(&self, v: &[u8], threshold: T) -> Result<BinaryLabel> {
        if !(threshold > T::zero() && threshold < T::one()) {
            return Err(RbmError::ThresholdOutOfRange(threshold.as_f64()));
        }
        let probs = self.hidden_probs(v)?;
        Ok(label_from_probs(&probs, threshold))
    }

    /// Mean per-bit cross-entropy between each row and its mean-field
    /// one-step reconstruction `σ(a + W·P(h|v))`.
    pub fn reconstruction_loss(&self, data: ArrayView2<T>) -> T {
        if data.nrows() == 0 {
            return T::zero();
        }
        let ph = self.hidden_probs_batch(data);
        let pv = self.visible_probs_batch(ph.view());
        let eps = T::lit(1e-12);
        let mut total = T::zero();
        for (&x, &p) in data.iter().zip(pv.iter()) {
            let p = p.max(eps).min(T::one() - eps);
            total -= x * p.ln() + (T::one() - x) * (T::one() - p).ln();
        }
        total / T::from_count(data.len())
    }
}

pub(crate) fn label_from_probs<T: Scalar>(probs: &[T], threshold: T) -> BinaryLabel {
    BinaryLabel {
        bits: probs.iter().map(|&p| u8::from(p >= threshold)).collect(),
    }
}
