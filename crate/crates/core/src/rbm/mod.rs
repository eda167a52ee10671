//! Bernoulli restricted Boltzmann machine over binary latent codes.
//!
//! Energy convention: `E(v, h) = −aᵀv − bᵀh − vᵀWh`, with `W` stored
//! visible × hidden. Training estimates the log-likelihood gradient as a
//! positive phase from the data minus a negative phase from one of the
//! backends in [`crate::samplers`] (or a single Gibbs step for CD-1).
//! A trained model labels a pixel by thresholding its hidden activation
//! probabilities into a [`BinaryLabel`].

mod io;
mod likelihood;
mod model;
mod select;
mod train;

pub use io::{checkpoint_path, load_rbm, save_rbm, RbmFile, TrainingProvenance, RBM_FORMAT_VERSION};
pub use likelihood::{free_energy, log_likelihood, log_partition};
pub use model::{BinaryLabel, RbmModel};
pub use select::{
    best_beta, beta_grid, label_dataset, run_dir, score_model, select_architecture, select_checkpoint, select_threshold, ModelScore, ArchitectureReport, ArchitectureRun,
    BetaChoice, ThresholdSelection, THRESHOLD_GRID,
};
pub use train::{
    cd1_update, positive_phase, train_rbm, Checkpoint, Gradient, NegativePhase, RbmTrainConfig,
    SamplerKind, TrainOutcome,
};

pub(crate) use model::label_from_probs;

use crate::metrics::MetricError;
use crate::samplers::SamplerError;

#[derive(Debug, thiserror::Error)]
pub enum RbmError {
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("input contains a value other than 0 or 1")]
    NotBinary,
    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    ThresholdOutOfRange(f64),
    #[error("non-finite parameters after epoch {epoch}")]
    NonFinite { epoch: usize },
    #[error("batch is empty")]
    EmptyBatch,
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("negative phase failed at epoch {epoch}: {source}")]
    Sampler {
        epoch: usize,
        #[source]
        source: SamplerError,
    },
    #[error(transparent)]
    SamplerSetup(#[from] SamplerError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("model file: {0}")]
    Format(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RbmError>;
