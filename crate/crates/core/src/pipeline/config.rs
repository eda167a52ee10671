use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::clustering::{Linkage, RbmDistanceMode};
use crate::data::PreprocessConfig;
use crate::lbae::Optimizer;
use crate::rbm::RbmTrainConfig;

/// Environment variable consulted when a remote sampler has no endpoint.
pub const ANNEAL_ENDPOINT_VAR: &str = "ANNEAL_ENDPOINT";

/// Seed for one pipeline stage: the 64-bit FNV-1a hash of the stage name
/// XORed with the master seed.
pub fn stage_seed(master: u64, stage: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(stage.as_bytes());
    h.finish() ^ master
}

/// Stage names that draw randomness, in pipeline order.
pub const STAGES: [&str; 4] = ["split", "lbae", "rbm", "kmeans"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPaths {
    /// ENVI header of the cube.
    pub cube: PathBuf,
    /// Ground-truth PNG or single-band ENVI header.
    pub ground_truth: PathBuf,
    /// Free-form scene name recorded in the manifest.
    #[serde(default)]
    pub scene: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LbaeStageConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: Optimizer,
    /// Channel widths `(c1, c2, c3)` of the encoder.
    pub widths: [usize; 3],
}

impl Default for LbaeStageConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            batch_size: 4,
            learning_rate: 1e-3,
            optimizer: Optimizer::Sgd,
            widths: [16, 32, 16],
        }
    }
}

/// `[rbm]` table: training settings plus the width(s) to train. Unknown
/// keys are rejected by [`PipelineConfig::from_toml`], since serde cannot
/// deny them through a flattened field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RbmStageConfig {
    #[serde(flatten)]
    pub train: RbmTrainConfig,
    /// Hidden width for single-model training.
    pub hidden: usize,
    /// Inclusive hidden-width range for architecture scans.
    pub scan: [usize; 2],
    pub repeats: usize,
}

impl Default for RbmStageConfig {
    fn default() -> Self {
        Self {
            train: RbmTrainConfig::default(),
            hidden: 23,
            scan: [3, 28],
            repeats: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AhcStageConfig {
    /// Merge RBM labels with AHC during `segment`.
    pub enabled: bool,
    pub linkage: Linkage,
    pub distance: RbmDistanceMode,
    pub k: usize,
}

impl Default for AhcStageConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            linkage: Linkage::Average,
            distance: RbmDistanceMode::HammingLabels,
            k: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KMeansStageConfig {
    pub k: usize,
    pub runs: usize,
    pub max_iters: usize,
}

impl Default for KMeansStageConfig {
    fn default() -> Self {
        Self {
            k: 7,
            runs: 10,
            max_iters: 300,
        }
    }
}

/// Everything one run needs. Relative paths are resolved against the
/// directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default = "default_tag")]
    pub tag: String,
    #[serde(default)]
    pub seed: u64,
    /// Run directory. When absent, `runs/<unix-time>-<tag>` is created.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetPaths,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub lbae: LbaeStageConfig,
    #[serde(default)]
    pub rbm: RbmStageConfig,
    #[serde(default)]
    pub ahc: AhcStageConfig,
    #[serde(default)]
    pub kmeans: KMeansStageConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn check_rbm_keys(table: &toml::Table) -> Result<()> {
    let known = toml::Table::try_from(RbmStageConfig::default()).expect("default config serializes");
    match table.keys().find(|k| !known.contains_key(*k) && *k != "remote_endpoint") {
        Some(k) => Err(PipelineError::Config(format!("rbm: unknown key `{k}`"))),
        None => Ok(()),
    }
}

fn default_tag() -> String {
    "run".into()
}

impl PipelineConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: toml::Table = toml::from_str(text)?;
        if let Some(rbm) = raw.get("rbm").and_then(toml::Value::as_table) {
            check_rbm_keys(rbm)?;
        }
        let mut cfg: Self = raw.try_into()?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| PipelineError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let cfg = Self::from_toml(&text, &base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        self.base_dir.join(p)
    }

    pub fn stage_seed(&self, stage: &str) -> u64 {
        stage_seed(self.seed, stage)
    }

    /// Checks that input files exist and that numeric settings are usable.
    pub fn validate(&self) -> Result<()> {
        let exists = |field: &str, p: &Path| {
            let full = self.resolve(p);
            if full.is_file() {
                Ok(())
            } else {
                Err(PipelineError::Config(format!("{field}: no such file {}", full.display())))
            }
        };
        exists("dataset.cube", &self.dataset.cube)?;
        exists("dataset.ground_truth", &self.dataset.ground_truth)?;
        if let Some(f) = &self.preprocess.noisy_bands_file {
            exists("preprocess.noisy_bands_file", f)?;
        }
        if self.lbae.widths.contains(&0) {
            return Err(PipelineError::Config("lbae.widths must be positive".into()));
        }
        if self.rbm.hidden == 0 || self.rbm.scan[0] == 0 || self.rbm.scan[0] > self.rbm.scan[1] {
            return Err(PipelineError::Config("rbm.hidden and rbm.scan must be positive, scan ascending".into()));
        }
        if self.ahc.k == 0 || self.kmeans.k == 0 || self.kmeans.runs == 0 {
            return Err(PipelineError::Config("ahc.k, kmeans.k and kmeans.runs must be positive".into()));
        }
        self.rbm.train.validate()?;
        Ok(())
    }

    /// The RBM training config with the stage seed and, for the remote
    /// sampler, the endpoint falling back to `ANNEAL_ENDPOINT`.
    pub fn rbm_train_config(&self) -> RbmTrainConfig {
        let mut cfg = self.rbm.train.clone();
        cfg.seed = self.stage_seed("rbm");
        if cfg.remote_endpoint.is_none() {
            cfg.remote_endpoint = std::env::var(ANNEAL_ENDPOINT_VAR).ok().filter(|s| !s.is_empty());
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_seed_is_fnv_xor_master() {
        // FNV-1a offset basis for the empty string
        assert_eq!(stage_seed(0, ""), 0xcbf29ce484222325);
        // FNV-1a("a") = 0xaf63dc4c8601ec8c
        assert_eq!(stage_seed(0, "a"), 0xaf63dc4c8601ec8c);
        assert_eq!(stage_seed(5, "a"), 0xaf63dc4c8601ec8c ^ 5);
        let seeds: std::collections::BTreeSet<u64> = STAGES.iter().map(|s| stage_seed(1, s)).collect();
        assert_eq!(seeds.len(), STAGES.len());
    }

    #[test]
    fn parses_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("c.hdr"), "").unwrap();
        let text = r#"
            seed = 7
            [dataset]
            cube = "c.hdr"
            ground_truth = "gt.png"
            [rbm]
            sampler = "sa"
            hidden = 5
            epochs = 3
            [ahc]
            linkage = "complete"
            distance = "centroid_sad"
        "#;
        let cfg = PipelineConfig::from_toml(text, dir.path()).unwrap();
        assert_eq!(cfg.rbm.hidden, 5);
        assert_eq!(cfg.rbm.train.epochs, 3);
        assert_eq!(cfg.ahc.linkage, Linkage::Complete);
        assert_eq!(cfg.lbae, LbaeStageConfig::default());
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("dataset.ground_truth"), "{err}");
        fs::write(dir.path().join("gt.png"), "").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.rbm_train_config().seed, stage_seed(7, "rbm"));
    }

    #[test]
    fn unknown_values_are_rejected() {
        let base = Path::new(".");
        let ok = "[dataset]\ncube = \"a\"\nground_truth = \"b\"\n";
        assert!(PipelineConfig::from_toml(ok, base).is_ok());
        assert!(PipelineConfig::from_toml(&format!("{ok}[ahc]\nlinkage = \"single\"\n"), base).is_err());
        assert!(PipelineConfig::from_toml(&format!("{ok}[rbm]\nsampler = \"magic\"\n"), base).is_err());
        assert!(PipelineConfig::from_toml(&format!("{ok}bogus = 1\n"), base).is_err());
        assert!(PipelineConfig::from_toml(&format!("{ok}[rbm]\nhiden = 3\n"), base).is_err());
        let remote = format!("{ok}[rbm]\nsampler = \"remote\"\nremote_endpoint = \"http://x\"\n");
        assert!(PipelineConfig::from_toml(&remote, base).is_ok());
    }
}
