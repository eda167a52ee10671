//! Hyperspectral cubes, ground truth, and the preprocessing that turns them
//! into normalized, split pixel datasets.

mod config;
mod cube;
mod dataset;
mod envi;
mod ground_truth;

use std::path::PathBuf;

pub use config::{hyperblood_noisy_bands, parse_noisy_bands, PreprocessConfig};
pub use cube::HyperCube;
pub use dataset::{mask_background, normalize_minmax, shuffle_split, MinMaxStats, PixelDataset, SplitDataset, SplitRatios};
pub use envi::{load_envi, save_envi, EnviHeader, EnviType, Interleave};
pub use ground_truth::{load_ground_truth, save_indexed_png, GroundTruth};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("ENVI header: {0}")]
    Header(String),
    #[error("unsupported ENVI data type {0}")]
    UnsupportedType(u32),
    #[error("payload too short: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("no payload file found next to {}", .0.display())]
    MissingPayload(PathBuf),
    #[error("non-finite value at x={x} y={y} band={band}")]
    NonFinite { x: usize, y: usize, band: usize },
    #[error("band {band} out of range for {bands} bands")]
    BandOutOfRange { band: usize, bands: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("no labeled pixels left after masking")]
    EmptyDataset,
    #[error("cannot split: {0}")]
    Split(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    PngDecode(#[from] png::DecodingError),
    #[error(transparent)]
    PngEncode(#[from] png::EncodingError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DataError>;
