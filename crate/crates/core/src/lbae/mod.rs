//! Binarizing 1D convolutional autoencoder that turns spectra into short
//! binary codes for the RBM.

mod conv;
mod io;
mod model;
mod train;

pub use conv::{Conv1dSpec, ConvLayer};
pub use io::{load_lbae, save_lbae, LayerFile, LbaeFile, LbaeProvenance, LBAE_FORMAT_VERSION};
pub use model::{LatentMode, Lbae, LbaeArchitecture, INPUT_LEN, LATENT_LEN};
pub use train::{
    evaluate_reconstruction, grid_search_lbae, reconstruction_metrics, select_grid_winner, train_lbae, GridCell,
    GridSearch, LbaeTrainConfig, Optimizer, BATCH_GRID, LR_GRID,
};

use crate::metrics::MetricError;

#[derive(Debug, thiserror::Error)]
pub enum LbaeError {
    #[error("invalid layer stack: {0}")]
    InvalidSpec(String),
    #[error("expected length {expected}, got {got}")]
    InputLength { expected: usize, got: usize },
    #[error("latent code must contain only 0 and 1")]
    NotBinary,
    #[error("no rows to train or evaluate on")]
    EmptyData,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("parameters became non-finite in epoch {epoch}")]
    NonFinite { epoch: usize },
    #[error("bad model file: {0}")]
    Format(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LbaeError>;
