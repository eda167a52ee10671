use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::conv::{Conv1dSpec, ConvLayer};
use super::model::{Lbae, LbaeArchitecture};
use super::{LbaeError, LbaeTrainConfig, Result};
use crate::Scalar;

pub const LBAE_FORMAT_VERSION: u32 = 1;

/// One layer as stored on disk. Convolution weights nest as
/// `[out][in][tap]`, transposed convolution weights as `[in][out][tap]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LayerFile<T> {
    pub spec: Conv1dSpec,
    pub weight: Vec<Vec<Vec<T>>>,
    pub bias: Vec<T>,
}

impl<T: Scalar> LayerFile<T> {
    fn from_layer(layer: &ConvLayer<T>) -> Self {
        let k = layer.spec.kernel;
        let inner = if layer.transposed { layer.spec.out_channels } else { layer.spec.in_channels };
        let weight = layer
            .weight
            .chunks(inner * k)
            .map(|outer| outer.chunks(k).map(<[T]>::to_vec).collect())
            .collect();
        Self {
            spec: layer.spec,
            weight,
            bias: layer.bias.clone(),
        }
    }

    fn into_layer(self, transposed: bool) -> Result<ConvLayer<T>> {
        let s = self.spec;
        let (outer, inner) = if transposed {
            (s.in_channels, s.out_channels)
        } else {
            (s.out_channels, s.in_channels)
        };
        let shape_ok = self.weight.len() == outer
            && self
                .weight
                .iter()
                .all(|o| o.len() == inner && o.iter().all(|taps| taps.len() == s.kernel));
        if !shape_ok {
            return Err(LbaeError::Format(format!(
                "weight tensor does not have shape [{outer}][{inner}][{}]",
                s.kernel
            )));
        }
        let flat = self.weight.into_iter().flatten().flatten().collect();
        ConvLayer::from_parts(s, transposed, flat, self.bias)
    }
}

/// How a saved model was trained, plus its final losses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LbaeProvenance {
    pub config: Option<LbaeTrainConfig>,
    pub final_train_loss: Option<f64>,
    pub final_val_loss: Option<f64>,
}

/// On-disk layout of a `.lbae.json` file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct LbaeFile<T> {
    pub format_version: u32,
    pub input_len: usize,
    pub latent_len: usize,
    pub encoder: Vec<LayerFile<T>>,
    pub decoder: Vec<LayerFile<T>>,
    #[serde(default)]
    pub provenance: LbaeProvenance,
}

pub fn save_lbae<T: Scalar>(path: &Path, model: &Lbae<T>, provenance: &LbaeProvenance) -> Result<()> {
    let file = LbaeFile {
        format_version: LBAE_FORMAT_VERSION,
        input_len: model.input_len(),
        latent_len: model.latent_len(),
        encoder: model.encoder.iter().map(LayerFile::from_layer).collect(),
        decoder: model.decoder.iter().map(LayerFile::from_layer).collect(),
        provenance: provenance.clone(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn load_lbae<T: Scalar>(path: &Path) -> Result<(Lbae<T>, LbaeProvenance)> {
    let file: LbaeFile<T> = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format_version != LBAE_FORMAT_VERSION {
        return Err(LbaeError::Format(format!(
            "unsupported format version {} in {}",
            file.format_version,
            path.display()
        )));
    }
    let architecture = LbaeArchitecture {
        input_len: file.input_len,
        encoder: file.encoder.iter().map(|l| l.spec).collect(),
        decoder: file.decoder.iter().map(|l| l.spec).collect(),
    };
    architecture.validate()?;
    if architecture.latent_len()? != file.latent_len {
        return Err(LbaeError::Format(format!(
            "declared latent length {} but layers give {}",
            file.latent_len,
            architecture.latent_len()?
        )));
    }
    let encoder = file.encoder.into_iter().map(|l| l.into_layer(false)).collect::<Result<_>>()?;
    let decoder = file.decoder.into_iter().map(|l| l.into_layer(true)).collect::<Result<_>>()?;
    let model = Lbae::from_layers(architecture, encoder, decoder)?;
    if !model.is_finite() {
        return Err(LbaeError::Format(format!("non-finite parameters in {}", path.display())));
    }
    Ok((model, file.provenance))
}
