use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{PipelineConfig, Result};

/// One run directory:
///
/// ```text
/// <root>/manifest.toml     deterministic record of every stage
/// <root>/provenance.toml   wall-clock times, kept out of the manifest
/// <root>/data/             split CSVs and normalization stats
/// <root>/models/           .lbae.json and .rbm.json files
/// <root>/checkpoints/      per-epoch RBM checkpoints
/// <root>/metrics/          loss curves and score tables
/// <root>/maps/             SEGM rasters and PNG renders
/// ```
#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

impl RunDir {
    /// Uses an existing directory (created if missing).
    pub fn open(root: impl Into<PathBuf>) -> Result<Self> {
        let run = Self { root: root.into() };
        for d in [run.data(), run.models(), run.checkpoints(), run.metrics(), run.maps()] {
            fs::create_dir_all(d)?;
        }
        Ok(run)
    }

    /// The config's `output_dir`, or `runs/<unix-time>-<tag>` under the
    /// config directory.
    pub fn for_config(cfg: &PipelineConfig) -> Result<Self> {
        match &cfg.output_dir {
            Some(dir) => Self::open(cfg.resolve(dir)),
            None => Self::open(cfg.resolve(Path::new("runs")).join(format!("{}-{}", unix_now(), cfg.tag))),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn data(&self) -> PathBuf {
        self.root.join("data")
    }

    pub fn models(&self) -> PathBuf {
        self.root.join("models")
    }

    pub fn checkpoints(&self) -> PathBuf {
        self.root.join("checkpoints")
    }

    pub fn metrics(&self) -> PathBuf {
        self.root.join("metrics")
    }

    pub fn maps(&self) -> PathBuf {
        self.root.join("maps")
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.toml")
    }

    pub fn lbae_model(&self) -> PathBuf {
        self.models().join("lbae.lbae.json")
    }

    pub fn rbm_model(&self) -> PathBuf {
        self.models().join("rbm.rbm.json")
    }

    /// Path relative to the run root, with `/` separators, for manifests.
    pub fn relative(&self, path: &Path) -> String {
        let rel = path.strip_prefix(&self.root).unwrap_or(path);
        rel.components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn load_manifest(&self) -> Result<Manifest> {
        let path = self.manifest_path();
        if !path.exists() {
            return Ok(Manifest::default());
        }
        Ok(toml::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save_manifest(&self, manifest: &Manifest) -> Result<()> {
        fs::write(self.manifest_path(), toml::to_string(manifest)?)?;
        Ok(())
    }

    /// Applies `f` to the manifest on disk.
    pub fn update_manifest(&self, f: impl FnOnce(&mut Manifest)) -> Result<Manifest> {
        let mut m = self.load_manifest()?;
        f(&mut m);
        self.save_manifest(&m)?;
        Ok(m)
    }

    /// Stamps `stage` with the current time in `provenance.toml`.
    pub fn record_provenance(&self, stage: &str) -> Result<()> {
        let path = self.root.join("provenance.toml");
        let mut prov: Provenance = match fs::read_to_string(&path) {
            Ok(text) => toml::from_str(&text)?,
            Err(_) => Provenance::default(),
        };
        prov.crate_version = env!("CARGO_PKG_VERSION").to_string();
        prov.stages.insert(stage.to_string(), unix_now());
        fs::write(path, toml::to_string(&prov)?)?;
        Ok(())
    }
}

/// Wall-clock record of when each stage last finished.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub crate_version: String,
    /// Stage name to unix time in seconds.
    pub stages: BTreeMap<String, u64>,
}

/// TOML integers are signed 64-bit, so derived seeds are stored as
/// decimal strings.
mod seed_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&seed.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

mod seeds_text {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(seeds: &[u64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(seeds.iter().map(u64::to_string))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u64>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|t| t.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tag: String,
    #[serde(with = "seed_text")]
    pub seed: u64,
    pub preprocess: Option<PreprocessRecord>,
    pub lbae: Option<LbaeRecord>,
    pub lbae_grid: Option<GridRecord>,
    pub rbm: Option<RbmRecord>,
    pub rbm_scan: Option<ScanRecord>,
    pub segment: Option<SegmentRecord>,
    pub kmeans_raw: Option<KMeansRecord>,
    pub kmeans_latent: Option<KMeansRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessRecord {
    pub cube: String,
    pub ground_truth: String,
    pub scene: Option<String>,
    #[serde(with = "seed_text")]
    pub split_seed: u64,
    pub width: usize,
    pub height: usize,
    pub source_bands: usize,
    pub bands: usize,
    pub dropped_bands: Vec<usize>,
    pub classes: Vec<u32>,
    pub foreground: usize,
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbaeRecord {
    pub model: String,
    pub loss: String,
    #[serde(with = "seed_text")]
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: String,
    pub widths: [usize; 3],
    pub latent_len: usize,
    pub final_train_loss: Option<f64>,
    pub final_val_loss: Option<f64>,
    pub test_euclidean: f64,
    pub test_sad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub table: String,
    pub winner_batch: usize,
    pub winner_learning_rate: f64,
    pub models: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmRecord {
    pub model: String,
    pub loss: String,
    pub checkpoints: String,
    pub sampler: String,
    #[serde(with = "seed_text")]
    pub seed: u64,
    pub n_hidden: usize,
    pub epochs: usize,
    pub best_epoch: usize,
    pub threshold: f64,
    pub validation_adjusted_rand: f64,
    pub validation_v_measure: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub table: String,
    pub wins: String,
    pub runs_root: String,
    pub hidden_min: usize,
    pub hidden_max: usize,
    pub repeats: usize,
    pub runs: usize,
    pub best_hidden: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub raster: String,
    pub png: String,
    pub rbm_model: String,
    pub threshold: f64,
    pub rbm_labels: usize,
    pub segments: usize,
    pub linkage: Option<String>,
    pub distance: Option<String>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansRecord {
    pub table: String,
    pub summary: String,
    pub k: usize,
    #[serde(with = "seeds_text")]
    pub seeds: Vec<u64>,
    pub mean: [f64; 4],
    pub std: [f64; 4],
}
