use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{LbaeError, Result};
use crate::Scalar;

/// Hyperparameters of a 1D (transposed) convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conv1dSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    pub dilation: usize,
}

impl Conv1dSpec {
    pub const fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
            dilation: 1,
        }
    }

    fn span(&self) -> usize {
        self.dilation * (self.kernel - 1) + 1
    }

    /// `floor((L + 2p − d(k−1) − 1) / s) + 1`, or `None` when the kernel does
    /// not fit.
    pub fn output_len(&self, l_in: usize) -> Option<usize> {
        let padded = l_in + 2 * self.padding;
        (self.is_valid() && padded >= self.span()).then(|| (padded - self.span()) / self.stride + 1)
    }

    /// `(L − 1)s − 2p + d(k−1) + 1`, the inverse shape of [`Self::output_len`].
    pub fn transposed_output_len(&self, l_in: usize) -> Option<usize> {
        if !self.is_valid() || l_in == 0 {
            return None;
        }
        ((l_in - 1) * self.stride + self.span()).checked_sub(2 * self.padding).filter(|&l| l > 0)
    }

    fn is_valid(&self) -> bool {
        self.in_channels > 0 && self.out_channels > 0 && self.kernel > 0 && self.stride > 0 && self.dilation > 0
    }
}

/// A convolution (`transposed == false`, weights `[out][in][k]`) or a
/// transposed convolution (weights `[in][out][k]`) with one bias per output
/// channel. Signals are channel-major: `x[c * len + t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer<T> {
    pub spec: Conv1dSpec,
    pub transposed: bool,
    pub weight: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> ConvLayer<T> {
    pub fn zeros(spec: Conv1dSpec, transposed: bool) -> Self {
        Self {
            spec,
            transposed,
            weight: vec![T::zero(); spec.in_channels * spec.out_channels * spec.kernel],
            bias: vec![T::zero(); spec.out_channels],
        }
    }

    /// Weights uniform in `±1/√(in_channels · kernel)`, biases zero.
    pub fn uniform<R: Rng + ?Sized>(spec: Conv1dSpec, transposed: bool, rng: &mut R) -> Self {
        let bound = 1.0 / ((spec.in_channels * spec.kernel) as f64).sqrt();
        let mut layer = Self::zeros(spec, transposed);
        for w in layer.weight.iter_mut() {
            *w = T::lit(rng.random_range(-bound..=bound));
        }
        layer
    }

    pub fn from_parts(spec: Conv1dSpec, transposed: bool, weight: Vec<T>, bias: Vec<T>) -> Result<Self> {
        let expected = spec.in_channels * spec.out_channels * spec.kernel;
        if weight.len() != expected || bias.len() != spec.out_channels {
            return Err(LbaeError::InvalidSpec(format!(
                "layer needs {expected} weights and {} biases, got {} and {}",
                spec.out_channels,
                weight.len(),
                bias.len()
            )));
        }
        Ok(Self {
            spec,
            transposed,
            weight,
            bias,
        })
    }

    pub fn n_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn output_len(&self, l_in: usize) -> Option<usize> {
        if self.transposed {
            self.spec.transposed_output_len(l_in)
        } else {
            self.spec.output_len(l_in)
        }
    }

    #[inline]
    fn w_index(&self, i: usize, o: usize, k: usize) -> usize {
        let s = &self.spec;
        if self.transposed {
            (i * s.out_channels + o) * s.kernel + k
        } else {
            (o * s.in_channels + i) * s.kernel + k
        }
    }

    /// Calls `f(t_in, t_out)` for every input/output position pair that
    /// kernel tap `k` connects.
    #[inline]
    fn taps(&self, k: usize, l_in: usize, l_out: usize, mut f: impl FnMut(usize, usize)) {
        let s = &self.spec;
        let offset = (k * s.dilation) as isize - s.padding as isize;
        // a convolution reads x[t*s + offset] for output t; a transposed
        // convolution writes y[t*s + offset] for input t
        let (outer, inner_len) = if self.transposed { (l_in, l_out) } else { (l_out, l_in) };
        let stride = s.stride as isize;
        // positions t with 0 <= t*stride + offset < inner_len
        let lo = if offset >= 0 { 0 } else { (-offset + stride - 1) / stride };
        let hi = ((inner_len as isize - offset + stride - 1) / stride).clamp(0, outer as isize);
        for t in lo..hi {
            let pos = (t * stride + offset) as usize;
            if self.transposed {
                f(t as usize, pos);
            } else {
                f(pos, t as usize);
            }
        }
    }

    pub fn forward(&self, x: &[T], l_in: usize) -> (Vec<T>, usize) {
        let s = self.spec;
        let l_out = self.output_len(l_in).expect("layer lengths validated");
        debug_assert_eq!(x.len(), s.in_channels * l_in);
        let mut y = vec![T::zero(); s.out_channels * l_out];
        for o in 0..s.out_channels {
            y[o * l_out..(o + 1) * l_out].fill(self.bias[o]);
        }
        for o in 0..s.out_channels {
            for i in 0..s.in_channels {
                let xi = &x[i * l_in..(i + 1) * l_in];
                let yo = &mut y[o * l_out..(o + 1) * l_out];
                for k in 0..s.kernel {
                    let w = self.weight[self.w_index(i, o, k)];
                    self.taps(k, l_in, l_out, |ti, to| yo[to] += w * xi[ti]);
                }
            }
        }
        (y, l_out)
    }

    /// Accumulates parameter gradients into `gw`, `gb` and returns the
    /// gradient with respect to the input.
    pub fn backward(&self, x: &[T], l_in: usize, gy: &[T], gw: &mut [T], gb: &mut [T]) -> Vec<T> {
        let s = self.spec;
        let l_out = gy.len() / s.out_channels;
        let mut gx = vec![T::zero(); s.in_channels * l_in];
        for o in 0..s.out_channels {
            gb[o] += gy[o * l_out..(o + 1) * l_out].iter().copied().sum::<T>();
        }
        for o in 0..s.out_channels {
            let go = &gy[o * l_out..(o + 1) * l_out];
            for i in 0..s.in_channels {
                let xi = &x[i * l_in..(i + 1) * l_in];
                let gxi = &mut gx[i * l_in..(i + 1) * l_in];
                for k in 0..s.kernel {
                    let wi = self.w_index(i, o, k);
                    let w = self.weight[wi];
                    let mut acc = T::zero();
                    self.taps(k, l_in, l_out, |ti, to| {
                        acc += go[to] * xi[ti];
                        gxi[ti] += w * go[to];
                    });
                    gw[wi] += acc;
                }
            }
        }
        gx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn output_length_formula() {
        let s = Conv1dSpec::new(1, 1, 4, 2, 1);
        assert_eq!(s.output_len(112), Some(56));
        assert_eq!(s.output_len(56), Some(28));
        assert_eq!(Conv1dSpec::new(1, 1, 3, 1, 1).output_len(28), Some(28));
        assert_eq!(s.transposed_output_len(28), Some(56));
        assert_eq!(Conv1dSpec::new(1, 1, 5, 1, 0).output_len(4), None);
        let dilated = Conv1dSpec {
            dilation: 2,
            ..Conv1dSpec::new(1, 1, 3, 1, 0)
        };
        assert_eq!(dilated.output_len(10), Some(6));
    }

    /// Direct evaluation of the convolution sum from its definition.
    fn reference(layer: &ConvLayer<f64>, x: &[f64], l_in: usize) -> Vec<f64> {
        let s = layer.spec;
        let l_out = layer.output_len(l_in).unwrap();
        let mut y = vec![0.0; s.out_channels * l_out];
        for o in 0..s.out_channels {
            for t in 0..l_out {
                y[o * l_out + t] = layer.bias[o];
            }
        }
        for o in 0..s.out_channels {
            for i in 0..s.in_channels {
                for k in 0..s.kernel {
                    for a in 0..l_in.max(l_out) {
                        if layer.transposed {
                            // input a contributes to output a*s - p + k*d
                            let pos = (a * s.stride + k * s.dilation) as isize - s.padding as isize;
                            if a < l_in && pos >= 0 && (pos as usize) < l_out {
                                y[o * l_out + pos as usize] +=
                                    layer.weight[(i * s.out_channels + o) * s.kernel + k] * x[i * l_in + a];
                            }
                        } else {
                            let pos = (a * s.stride + k * s.dilation) as isize - s.padding as isize;
                            if a < l_out && pos >= 0 && (pos as usize) < l_in {
                                y[o * l_out + a] +=
                                    layer.weight[(o * s.in_channels + i) * s.kernel + k] * x[i * l_in + pos as usize];
                            }
                        }
                    }
                }
            }
        }
        y
    }

    #[test]
    fn forward_matches_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for transposed in [false, true] {
            let layer = ConvLayer::<f64>::uniform(Conv1dSpec::new(3, 2, 4, 2, 1), transposed, &mut rng);
            let x: Vec<f64> = (0..3 * 10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (y, _) = layer.forward(&x, 10);
            let r = reference(&layer, &x, 10);
            for (a, b) in y.iter().zip(&r) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn transposed_is_the_adjoint() {
        // <conv(x), y> = <x, convT(y)> with shared weights and zero bias
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = Conv1dSpec::new(2, 3, 4, 2, 1);
        let conv = ConvLayer::<f64>::uniform(spec, false, &mut rng);
        let mut tconv = ConvLayer::zeros(Conv1dSpec::new(3, 2, 4, 2, 1), true);
        for o in 0..3 {
            for i in 0..2 {
                for k in 0..4 {
                    tconv.weight[(o * 2 + i) * 4 + k] = conv.weight[(o * 2 + i) * 4 + k];
                }
            }
        }
        let conv = ConvLayer { bias: vec![0.0; 3], ..conv };
        let x: Vec<f64> = (0..2 * 12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (cx, lo) = conv.forward(&x, 12);
        let y: Vec<f64> = (0..3 * lo).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (ty, lt) = tconv.forward(&y, lo);
        assert_eq!(lt, 12);
        let lhs: f64 = cx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(&ty).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for transposed in [false, true] {
            let layer = ConvLayer::<f64>::uniform(Conv1dSpec::new(2, 3, 3, 2, 1), transposed, &mut rng);
            let l_in = 7;
            let x: Vec<f64> = (0..2 * l_in).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (y, _) = layer.forward(&x, l_in);
            let c: Vec<f64> = y.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            // loss = <c, y>, so dL/dy = c
            let loss = |l: &ConvLayer<f64>, x: &[f64]| -> f64 { l.forward(x, l_in).0.iter().zip(&c).map(|(a, b)| a * b).sum() };
            let mut gw = vec![0.0; layer.weight.len()];
            let mut gb = vec![0.0; layer.bias.len()];
            let gx = layer.backward(&x, l_in, &c, &mut gw, &mut gb);
            let h = 1e-6;
            for p in 0..layer.weight.len() {
                let (mut a, mut b) = (layer.clone(), layer.clone());
                a.weight[p] += h;
                b.weight[p] -= h;
                assert!(((loss(&a, &x) - loss(&b, &x)) / (2.0 * h) - gw[p]).abs() < 1e-8);
            }
            for p in 0..layer.bias.len() {
                let (mut a, mut b) = (layer.clone(), layer.clone());
                a.bias[p] += h;
                b.bias[p] -= h;
                assert!(((loss(&a, &x) - loss(&b, &x)) / (2.0 * h) - gb[p]).abs() < 1e-8);
            }
            for p in 0..x.len() {
                let (mut xa, mut xb) = (x.clone(), x.clone());
                xa[p] += h;
                xb[p] -= h;
                assert!(((loss(&layer, &xa) - loss(&layer, &xb)) / (2.0 * h) - gx[p]).abs() < 1e-8);
            }
        }
    }
}
