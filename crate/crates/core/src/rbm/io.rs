use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{RbmError, RbmModel, RbmTrainConfig, Result};
use crate::Scalar;

pub const RBM_FORMAT_VERSION: u32 = 1;

/// How a saved model was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainingProvenance {
    pub sampler: String,
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub num_reads: usize,
}

impl TrainingProvenance {
    pub fn from_config(config: &RbmTrainConfig, epochs_completed: usize) -> Self {
        Self {
            sampler: config.sampler.to_string(),
            seed: config.seed,
            epochs: epochs_completed,
            learning_rate: config.learning_rate,
            batch_size: config.batch_size,
            num_reads: config.num_reads,
        }
    }
}

/// On-disk layout of a `.rbm.json` file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RbmFile<T> {
    pub format_version: u32,
    pub n_visible: usize,
    pub n_hidden: usize,
    pub model: RbmModel<T>,
    pub provenance: TrainingProvenance,
}

/// `<dir>/<epoch>.rbm.json`
pub fn checkpoint_path(dir: &Path, epoch: usize) -> PathBuf {
    dir.join(format!("{epoch}.rbm.json"))
}

pub fn save_rbm<T: Scalar>(path: &Path, model: &RbmModel<T>, provenance: &TrainingProvenance) -> Result<()> {
    let file = RbmFile {
        format_version: RBM_FORMAT_VERSION,
        n_visible: model.n_visible(),
        n_hidden: model.n_hidden(),
        model: model.clone(),
        provenance: provenance.clone(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_rbm<T: Scalar>(path: &Path) -> Result<(RbmModel<T>, TrainingProvenance)> {
    let file: RbmFile<T> = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.format_version != RBM_FORMAT_VERSION {
        return Err(RbmError::Format(format!(
            "unsupported format version {} in {}",
            file.format_version,
            path.display()
        )));
    }
    let m = file.model;
    if m.n_visible() != file.n_visible
        || m.n_hidden() != file.n_hidden
        || m.visible_bias.len() != file.n_visible
        || m.hidden_bias.len() != file.n_hidden
    {
        return Err(RbmError::Format(format!(
            "declared {}x{} does not match stored parameters in {}",
            file.n_visible,
            file.n_hidden,
            path.display()
        )));
    }
    if !m.is_finite() {
        return Err(RbmError::Format(format!("non-finite parameters in {}", path.display())));
    }
    Ok((m, file.provenance))
}
