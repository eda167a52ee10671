use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{PipelineError, Result};
use crate::data::{save_envi, save_indexed_png, EnviType, GroundTruth, HyperCube, Interleave};
use crate::pipeline::Palette;

/// Shape and noise of a generated test scene.
///
/// Class `c` has a smooth mean spectrum `0.5 + 0.3·sin(2π f_c b / B + φ_c)`.
/// Each pixel is `(1 + g)·μ_c + ε` with a per-pixel gain `g ~ N(0, gain²)`
/// and band noise `ε ~ N(0, noise²)`, so every class is Gaussian. The outer
/// one-pixel border is background; the interior is split into vertical
/// stripes, one per class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub classes: usize,
    pub noise: f64,
    pub gain: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            width: 32,
            height: 32,
            bands: 112,
            classes: 7,
            noise: 0.05,
            gain: 0.15,
            seed: 2024,
        }
    }
}

impl SynthConfig {
    pub fn class_mean(&self, class: usize, band: usize) -> f64 {
        let c = class as f64;
        let freq = 1.0 + 0.5 * c;
        let phase = 0.9 * c;
        0.5 + 0.3 * (TAU * freq * band as f64 / self.bands as f64 + phase).sin()
    }

    fn class_at(&self, x: usize, y: usize) -> u32 {
        if x == 0 || y == 0 || x + 1 >= self.width || y + 1 >= self.height {
            return 0;
        }
        let inner = self.width - 2;
        1 + ((x - 1) * self.classes / inner) as u32
    }
}

/// Generates the cube and its ground truth.
pub fn synthetic_scene(cfg: &SynthConfig) -> Result<(HyperCube<f64>, GroundTruth)> {
    if cfg.width < 3 || cfg.height < 3 || cfg.bands == 0 || cfg.classes == 0 || cfg.classes > cfg.width - 2 {
        return Err(PipelineError::Config(format!(
            "cannot fit {} classes in a {}x{}x{} scene",
            cfg.classes, cfg.width, cfg.height, cfg.bands
        )));
    }
    let noise = Normal::new(0.0, cfg.noise).map_err(|e| PipelineError::Config(format!("noise: {e}")))?;
    let gain = Normal::new(0.0, cfg.gain).map_err(|e| PipelineError::Config(format!("gain: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut labels = Vec::with_capacity(cfg.width * cfg.height);
    let mut data = Vec::with_capacity(cfg.width * cfg.height * cfg.bands);
    for y in 0..cfg.height {
        for x in 0..cfg.width {
            let class = cfg.class_at(x, y);
            labels.push(class);
            let g = 1.0 + gain.sample(&mut rng);
            let mean_class = class.saturating_sub(1) as usize;
            for b in 0..cfg.bands {
                let base = if class == 0 { 0.05 } else { g * cfg.class_mean(mean_class, b) };
                data.push(base + noise.sample(&mut rng));
            }
        }
    }
    let cube = HyperCube::new(cfg.width, cfg.height, cfg.bands, data, None)?;
    Ok((cube, GroundTruth::new(cfg.width, cfg.height, labels)?))
}

/// Paths written by [`write_synthetic_scene`].
#[derive(Debug, Clone)]
pub struct SynthFiles {
    pub cube: PathBuf,
    pub ground_truth: PathBuf,
    pub config: PathBuf,
}

/// Writes `scene.hdr`/`scene.img`, `ground_truth.png` and a pipeline
/// `config.toml` (no band removal, output under `dir/run`) into `dir`.
pub fn write_synthetic_scene(dir: &Path, cfg: &SynthConfig) -> Result<SynthFiles> {
    fs::create_dir_all(dir)?;
    let (cube, gt) = synthetic_scene(cfg)?;
    let cube_path = dir.join("scene.hdr");
    save_envi(&cube_path, &cube, Interleave::Bip, EnviType::F64)?;
    let gt_path = dir.join("ground_truth.png");
    let palette = Palette::bundled();
    let top = gt.classes().last().copied().unwrap_or(0) as u8;
    let colors: Vec<[u8; 3]> = (0..=top).map(|l| palette.color(l)).collect();
    save_indexed_png(&gt_path, gt.width(), gt.height(), gt.labels(), &colors)?;
    let config = dir.join("config.toml");
    fs::write(&config, synthetic_config_text(cfg))?;
    Ok(SynthFiles {
        cube: cube_path,
        ground_truth: gt_path,
        config,
    })
}

fn synthetic_config_text(cfg: &SynthConfig) -> String {
    format!(
        r#"tag = "synthetic"
seed = {seed}
output_dir = "run"

[dataset]
cube = "scene.hdr"
ground_truth = "ground_truth.png"
scene = "synthetic"

[preprocess]
noisy_bands = []

[lbae]
epochs = 50
batch_size = 16
learning_rate = 0.001
optimizer = "adam"

[rbm]
hidden = 23
epochs = 200
batch_size = 16
learning_rate = 0.05
checkpoint_every = 20

[ahc]
linkage = "average"
distance = "hamming"
k = {k}

[kmeans]
k = {k}
"#,
        seed = cfg.seed,
        k = cfg.classes
    )
}
