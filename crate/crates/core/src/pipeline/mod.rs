//! End-to-end runs: TOML configuration, one function per CLI stage, the
//! run directory with its manifest, label rasters and a synthetic scene
//! generator.
//!
//! All randomness derives from the config's master seed; stage `s` uses
//! [`stage_seed`]`(seed, s)`, the FNV-1a hash of the stage name XORed with
//! the master seed.

mod config;
mod raster;
mod run;
mod stages;
mod synth;

pub use config::{
    stage_seed, AhcStageConfig, DatasetPaths, KMeansStageConfig, LbaeStageConfig, PipelineConfig, RbmStageConfig,
    ANNEAL_ENDPOINT_VAR, STAGES,
};
pub use raster::{Palette, SegmentationMap, SEGM_HEADER_LEN, SEGM_MAGIC};
pub use run::{
    unix_now, GridRecord, KMeansRecord, LbaeRecord, Manifest, PreprocessRecord, Provenance, RbmRecord, RunDir,
    ScanRecord, SegmentRecord,
};
pub use stages::{
    baseline_kmeans_stage, evaluate_rasters, grid_search_lbae_stage, load_foreground, load_label_raster, load_splits,
    load_state, preprocess, run_pipeline, scores_json, segment_stage, train_lbae_stage, train_rbm_stage,
    write_scores_csv, AhcOptions, PipelineSummary, PreprocessState, RbmPlan, RbmStageResult, SegmentOptions, SPLITS,
};
pub use synth::{synthetic_scene, write_synthetic_scene, SynthConfig, SynthFiles};

use std::path::PathBuf;

use crate::clustering::ClusterError;
use crate::data::DataError;
use crate::lbae::LbaeError;
use crate::metrics::MetricError;
use crate::rbm::RbmError;
use crate::samplers::SamplerError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing artifact {0}; run the earlier stage first")]
    MissingArtifact(PathBuf),
    #[error("label raster: {0}")]
    Raster(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Lbae(#[from] LbaeError),
    #[error(transparent)]
    Rbm(#[from] RbmError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Sampler(#[from] SamplerError),
    #[error(transparent)]
    TomlRead(#[from] toml::de::Error),
    #[error(transparent)]
    TomlWrite(#[from] toml::ser::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PipelineError>;
