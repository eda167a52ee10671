use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::conv::{Conv1dSpec, ConvLayer};
use super::{LbaeError, Result};
use crate::Scalar;

/// Spectral length after noisy-band removal.
pub const INPUT_LEN: usize = 112;
/// Binary code length for [`INPUT_LEN`] inputs.
pub const LATENT_LEN: usize = 28;

/// Layer shapes of an autoencoder. The encoder runs on a single-channel
/// signal of `input_len` samples; the decoder must map the code back to
/// one channel of the same length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LbaeArchitecture {
    pub input_len: usize,
    pub encoder: Vec<Conv1dSpec>,
    pub decoder: Vec<Conv1dSpec>,
}

impl LbaeArchitecture {
    /// Four encoder convolutions with kernels (3, 4, 4, 3), strides
    /// (1, 2, 2, 1), padding 1 and widths `1 → c1 → c2 → c3 → 1`, mirrored
    /// by transposed convolutions in the decoder.
    pub fn with_widths(input_len: usize, c1: usize, c2: usize, c3: usize) -> Self {
        Self {
            input_len,
            encoder: vec![
                Conv1dSpec::new(1, c1, 3, 1, 1),
                Conv1dSpec::new(c1, c2, 4, 2, 1),
                Conv1dSpec::new(c2, c3, 4, 2, 1),
                Conv1dSpec::new(c3, 1, 3, 1, 1),
            ],
            decoder: vec![
                Conv1dSpec::new(1, c3, 3, 1, 1),
                Conv1dSpec::new(c3, c2, 4, 2, 1),
                Conv1dSpec::new(c2, c1, 4, 2, 1),
                Conv1dSpec::new(c1, 1, 3, 1, 1),
            ],
        }
    }

    pub fn standard() -> Self {
        Self::with_widths(INPUT_LEN, 16, 32, 16)
    }

    /// Signal lengths before the first encoder layer and after every
    /// encoder layer.
    pub fn layer_lengths(&self) -> Result<Vec<usize>> {
        let mut lens = vec![self.input_len];
        for (i, s) in self.encoder.iter().enumerate() {
            let l = s
                .output_len(*lens.last().expect("non-empty"))
                .ok_or_else(|| LbaeError::InvalidSpec(format!("encoder layer {} does not fit its input", i + 1)))?;
            lens.push(l);
        }
        Ok(lens)
    }

    pub fn latent_len(&self) -> Result<usize> {
        let last = self.encoder.last().ok_or_else(|| LbaeError::InvalidSpec("empty encoder".into()))?;
        Ok(last.out_channels * self.layer_lengths()?.last().expect("non-empty"))
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_len == 0 || self.encoder.is_empty() || self.decoder.is_empty() {
            return Err(LbaeError::InvalidSpec("encoder and decoder need at least one layer".into()));
        }
        if self.encoder[0].in_channels != 1 {
            return Err(LbaeError::InvalidSpec("encoder input must have one channel".into()));
        }
        for (name, layers) in [("encoder", &self.encoder), ("decoder", &self.decoder)] {
            for (i, w) in layers.windows(2).enumerate() {
                if w[0].out_channels != w[1].in_channels {
                    return Err(LbaeError::InvalidSpec(format!(
                        "{name} layer {} emits {} channels but layer {} takes {}",
                        i + 1,
                        w[0].out_channels,
                        i + 2,
                        w[1].in_channels
                    )));
                }
            }
        }
        let lens = self.layer_lengths()?;
        let code_channels = self.encoder.last().expect("non-empty").out_channels;
        if self.decoder[0].in_channels != code_channels {
            return Err(LbaeError::InvalidSpec(format!(
                "decoder takes {} channels, encoder emits {code_channels}",
                self.decoder[0].in_channels
            )));
        }
        let mut l = *lens.last().expect("non-empty");
        for (i, s) in self.decoder.iter().enumerate() {
            l = s
                .transposed_output_len(l)
                .ok_or_else(|| LbaeError::InvalidSpec(format!("decoder layer {} has no valid output", i + 1)))?;
        }
        if l != self.input_len || self.decoder.last().expect("non-empty").out_channels != 1 {
            return Err(LbaeError::InvalidSpec(format!(
                "decoder produces {l} samples, expected one channel of {}",
                self.input_len
            )));
        }
        Ok(())
    }
}

/// How the binarization step is treated when differentiating.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatentMode {
    /// Forward pass binarizes; backward passes the gradient straight through
    /// where the pre-activation lies in [−1, 1] and zeroes it elsewhere.
    StraightThrough,
    /// Forward pass uses `clamp(z, −1, 1)`, whose true derivative equals the
    /// straight-through gradient. Used to check gradients numerically.
    Relaxed,
}

/// Binarizing convolutional autoencoder.
#[derive(Debug, Clone, PartialEq)]
pub struct Lbae<T> {
    pub architecture: LbaeArchitecture,
    pub encoder: Vec<ConvLayer<T>>,
    pub decoder: Vec<ConvLayer<T>>,
}

/// Activations kept for backprop: the input of every layer in order, and
/// the latent pre-activation.
struct Trace<T> {
    inputs: Vec<(Vec<T>, usize)>,
    latent_pre: Vec<T>,
    output: Vec<T>,
}

impl<T: Scalar> Lbae<T> {
    /// Seeded uniform initialization in `±1/√fan_in`.
    pub fn new(architecture: LbaeArchitecture, seed: u64) -> Result<Self> {
        architecture.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = architecture.encoder.iter().map(|&s| ConvLayer::uniform(s, false, &mut rng)).collect();
        let decoder = architecture.decoder.iter().map(|&s| ConvLayer::uniform(s, true, &mut rng)).collect();
        Ok(Self {
            architecture,
            encoder,
            decoder,
        })
    }

    /// All weights and biases set to zero.
    pub fn zeros(architecture: LbaeArchitecture) -> Result<Self> {
        architecture.validate()?;
        let encoder = architecture.encoder.iter().map(|&s| ConvLayer::zeros(s, false)).collect();
        let decoder = architecture.decoder.iter().map(|&s| ConvLayer::zeros(s, true)).collect();
        Ok(Self {
            architecture,
            encoder,
            decoder,
        })
    }

    pub fn input_len(&self) -> usize {
        self.architecture.input_len
    }

    pub fn latent_len(&self) -> usize {
        self.architecture.latent_len().expect("architecture validated")
    }

    fn layers(&self) -> impl Iterator<Item = &ConvLayer<T>> {
        self.encoder.iter().chain(&self.decoder)
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut ConvLayer<T>> {
        self.encoder.iter_mut().chain(self.decoder.iter_mut())
    }

    pub fn n_params(&self) -> usize {
        self.layers().map(ConvLayer::n_params).sum()
    }

    /// Flat parameter vector: weights then biases of every encoder layer,
    /// followed by the decoder layers in the same way.
    pub fn parameters(&self) -> Vec<T> {
        let mut p = Vec::with_capacity(self.n_params());
        for l in self.layers() {
            p.extend_from_slice(&l.weight);
            p.extend_from_slice(&l.bias);
        }
        p
    }

    pub fn set_parameters(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(LbaeError::InputLength {
                expected: self.n_params(),
                got: params.len(),
            });
        }
        let mut rest = params;
        for l in self.layers_mut() {
            let (w, r) = rest.split_at(l.weight.len());
            l.weight.copy_from_slice(w);
            let (b, r) = r.split_at(l.bias.len());
            l.bias.copy_from_slice(b);
            rest = r;
        }
        Ok(())
    }

    /// `params -= lr * grad`
    pub(crate) fn sgd_step(&mut self, grad: &[T], lr: T) {
        let mut g = grad.iter();
        for l in self.layers_mut() {
            for (w, &gi) in l.weight.iter_mut().chain(l.bias.iter_mut()).zip(&mut g) {
                *w -= lr * gi;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers().all(|l| l.weight.iter().chain(&l.bias).all(|w| w.is_finite()))
    }

    fn encoder_pre(&self, pixel: &[T], mut keep: Option<&mut Vec<(Vec<T>, usize)>>) -> Vec<T> {
        let mut x = pixel.to_vec();
        let mut len = self.input_len();
        let last = self.encoder.len() - 1;
        for (i, layer) in self.encoder.iter().enumerate() {
            let (mut y, l_out) = layer.forward(&x, len);
            if i < last {
                y.iter_mut().for_each(|v| *v = v.tanh());
            }
            if let Some(k) = keep.as_deref_mut() {
                k.push((x, len));
            }
            x = y;
            len = l_out;
        }
        x
    }

    fn decoder_forward(&self, code: Vec<T>, mut keep: Option<&mut Vec<(Vec<T>, usize)>>) -> Vec<T> {
        let mut x = code;
        let mut len = self.architecture.layer_lengths().expect("validated").last().copied().expect("non-empty");
        let last = self.decoder.len() - 1;
        for (i, layer) in self.decoder.iter().enumerate() {
            let (mut y, l_out) = layer.forward(&x, len);
            if i < last {
                y.iter_mut().for_each(|v| *v = v.tanh());
            } else {
                y.iter_mut().for_each(|v| *v = v.sigmoid());
            }
            if let Some(k) = keep.as_deref_mut() {
                k.push((x, len));
            }
            x = y;
            len = l_out;
        }
        x
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got == expected {
            Ok(())
        } else {
            Err(LbaeError::InputLength { expected, got })
        }
    }

    /// Binary code of one spectrum: 1 where the last encoder pre-activation
    /// is ≥ 0, else 0.
    pub fn encode(&self, pixel: &[T]) -> Result<Vec<u8>> {
        self.check_len(pixel.len(), self.input_len())?;
        Ok(self.encoder_pre(pixel, None).iter().map(|&z| u8::from(z >= T::zero())).collect())
    }

    /// Reconstruction from a binary code; every output lies in (0, 1).
    pub fn decode(&self, latent: &[u8]) -> Result<Vec<T>> {
        self.check_len(latent.len(), self.latent_len())?;
        if latent.iter().any(|&b| b > 1) {
            return Err(LbaeError::NotBinary);
        }
        Ok(self.decoder_forward(latent.iter().map(|&b| T::from_count(b as usize)).collect(), None))
    }

    pub fn reconstruct(&self, pixel: &[T]) -> Result<Vec<T>> {
        self.decode(&self.encode(pixel)?)
    }

    fn check_batch(&self, data: ArrayView2<T>) -> Result<()> {
        self.check_len(data.ncols(), self.input_len())
    }

    /// Binary codes of every row, as 0/1 scalars ready for the RBM.
    pub fn latent_codes(&self, data: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_batch(data)?;
        let rows: Vec<Vec<u8>> = (0..data.nrows())
            .into_par_iter()
            .map(|i| {
                let row = data.row(i).to_vec();
                self.encode(&row).expect("length checked")
            })
            .collect();
        let mut out = Array2::zeros((data.nrows(), self.latent_len()));
        for (i, code) in rows.iter().enumerate() {
            for (j, &b) in code.iter().enumerate() {
                out[[i, j]] = T::from_count(b as usize);
            }
        }
        Ok(out)
    }

    /// Encode-then-decode of every row.
    pub fn reconstruct_batch(&self, data: ArrayView2<T>) -> Result<Array2<T>> {
        self.check_batch(data)?;
        let rows: Vec<Vec<T>> = (0..data.nrows())
            .into_par_iter()
            .map(|i| self.reconstruct(&data.row(i).to_vec()).expect("length checked"))
            .collect();
        let mut out = Array2::zeros(data.dim());
        for (i, r) in rows.iter().enumerate() {
            out.row_mut(i).assign(&ndarray::ArrayView1::from(r.as_slice()));
        }
        Ok(out)
    }

    /// Mean squared reconstruction error per band, averaged over rows.
    pub fn mse(&self, data: ArrayView2<T>) -> Result<T> {
        if data.nrows() == 0 {
            return Err(LbaeError::EmptyData);
        }
        let rec = self.reconstruct_batch(data)?;
        let total: T = rec.iter().zip(data.iter()).map(|(&r, &x)| (r - x) * (r - x)).sum();
        Ok(total / T::from_count(data.len()))
    }

    fn trace(&self, pixel: &[T], mode: LatentMode) -> Trace<T> {
        let mut inputs = Vec::with_capacity(self.encoder.len() + self.decoder.len());
        let latent_pre = self.encoder_pre(pixel, Some(&mut inputs));
        let code: Vec<T> = match mode {
            LatentMode::StraightThrough => latent_pre
                .iter()
                .map(|&z| if z >= T::zero() { T::one() } else { T::zero() })
                .collect(),
            LatentMode::Relaxed => latent_pre.iter().map(|&z| z.max(-T::one()).min(T::one())).collect(),
        };
        let output = self.decoder_forward(code, Some(&mut inputs));
        Trace {
            inputs,
            latent_pre,
            output,
        }
    }

    /// Squared error of one pixel (summed over bands) and its gradient,
    /// accumulated into `grad`.
    fn backprop(&self, pixel: &[T], mode: LatentMode, scale: T, grad: &mut [T]) -> T {
        let t = self.trace(pixel, mode);
        let loss: T = t.output.iter().zip(pixel).map(|(&o, &x)| (o - x) * (o - x)).sum();

        // offsets of each layer's parameters in the flat vector
        let mut offsets = Vec::new();
        let mut off = 0;
        for l in self.layers() {
            offsets.push(off);
            off += l.n_params();
        }

        let n_enc = self.encoder.len();
        let two = T::lit(2.0);
        // d loss / d pre-sigmoid output
        let mut g: Vec<T> = t
            .output
            .iter()
            .zip(pixel)
            .map(|(&o, &x)| scale * two * (o - x) * o * (T::one() - o))
            .collect();
        for (d, layer) in self.decoder.iter().enumerate().rev() {
            let (x, len) = &t.inputs[n_enc + d];
            let at = offsets[n_enc + d];
            let (gw, gb) = grad[at..at + layer.n_params()].split_at_mut(layer.weight.len());
            g = layer.backward(x, *len, &g, gw, gb);
            if d > 0 {
                // x = tanh(pre) of the previous decoder layer
                g.iter_mut().zip(x).for_each(|(gi, &xi)| *gi *= T::one() - xi * xi);
            }
        }
        // through the binarization
        g.iter_mut().zip(&t.latent_pre).for_each(|(gi, &z)| {
            if z.abs() > T::one() {
                *gi = T::zero();
            }
        });
        for (e, layer) in self.encoder.iter().enumerate().rev() {
            let (x, len) = &t.inputs[e];
            let at = offsets[e];
            let (gw, gb) = grad[at..at + layer.n_params()].split_at_mut(layer.weight.len());
            g = layer.backward(x, *len, &g, gw, gb);
            if e > 0 {
                g.iter_mut().zip(x).for_each(|(gi, &xi)| *gi *= T::one() - xi * xi);
            }
        }
        loss
    }

    /// Mean squared error of the batch and its gradient with respect to
    /// [`Self::parameters`]. Rows are processed in parallel and summed in
    /// row order, so the result does not depend on the thread count.
    pub fn loss_and_gradient(&self, batch: ArrayView2<T>, mode: LatentMode) -> Result<(T, Vec<T>)> {
        self.check_batch(batch)?;
        if batch.nrows() == 0 {
            return Err(LbaeError::EmptyData);
        }
        let denom = T::from_count(batch.len());
        let scale = T::one() / denom;
        let per_row: Vec<(T, Vec<T>)> = (0..batch.nrows())
            .into_par_iter()
            .map(|i| {
                let mut g = vec![T::zero(); self.n_params()];
                let l = self.backprop(&batch.row(i).to_vec(), mode, scale, &mut g);
                (l, g)
            })
            .collect();
        let mut grad = vec![T::zero(); self.n_params()];
        let mut loss = T::zero();
        for (l, g) in per_row {
            loss += l;
            grad.iter_mut().zip(&g).for_each(|(a, &b)| *a += b);
        }
        Ok((loss / denom, grad))
    }

    pub fn from_layers(architecture: LbaeArchitecture, encoder: Vec<ConvLayer<T>>, decoder: Vec<ConvLayer<T>>) -> Result<Self> {
        architecture.validate()?;
        let specs_match = |layers: &[ConvLayer<T>], specs: &[Conv1dSpec], transposed: bool| {
            layers.len() == specs.len() && layers.iter().zip(specs).all(|(l, s)| l.spec == *s && l.transposed == transposed)
        };
        if !specs_match(&encoder, &architecture.encoder, false) || !specs_match(&decoder, &architecture.decoder, true) {
            return Err(LbaeError::InvalidSpec("layers do not match the architecture".into()));
        }
        Ok(Self {
            architecture,
            encoder,
            decoder,
        })
    }
}
