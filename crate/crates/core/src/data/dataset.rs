use std::collections::BTreeSet;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, GroundTruth, HyperCube, Result};
use crate::Scalar;

/// Labeled pixels: one spectrum per row, with its class id and `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelDataset<T> {
    pub pixels: Array2<T>,
    pub labels: Vec<u32>,
    pub coords: Vec<(usize, usize)>,
}

impl<T: Scalar> PixelDataset<T> {
    pub fn new(pixels: Array2<T>, labels: Vec<u32>, coords: Vec<(usize, usize)>) -> Result<Self> {
        if labels.len() != pixels.nrows() || coords.len() != pixels.nrows() {
            return Err(DataError::Shape(format!(
                "{} pixels, {} labels, {} coordinates",
                pixels.nrows(),
                labels.len(),
                coords.len()
            )));
        }
        Ok(Self { pixels, labels, coords })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn band_count(&self) -> usize {
        self.pixels.ncols()
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            pixels: self.pixels.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            coords: indices.iter().map(|&i| self.coords[i]).collect(),
        }
    }

    /// Drops bands from every pixel, keeping the remaining order.
    pub fn drop_bands(&self, drop: &BTreeSet<usize>) -> Result<Self> {
        if let Some(&bad) = drop.range(self.band_count()..).next() {
            return Err(DataError::BandOutOfRange {
                band: bad,
                bands: self.band_count(),
            });
        }
        let keep: Vec<usize> = (0..self.band_count()).filter(|b| !drop.contains(b)).collect();
        if keep.is_empty() {
            return Err(DataError::Shape("cannot drop every band".into()));
        }
        Ok(Self {
            pixels: self.pixels.select(Axis(1), &keep),
            labels: self.labels.clone(),
            coords: self.coords.clone(),
        })
    }
}

/// Keeps the pixels whose ground-truth id is non-zero, in row-major order.
pub fn mask_background<T: Scalar>(cube: &HyperCube<T>, gt: &GroundTruth) -> Result<PixelDataset<T>> {
    if (cube.width(), cube.height()) != (gt.width(), gt.height()) {
        return Err(DataError::Shape(format!(
            "cube is {}x{} but ground truth is {}x{}",
            cube.width(),
            cube.height(),
            gt.width(),
            gt.height()
        )));
    }
    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    for y in 0..cube.height() {
        for x in 0..cube.width() {
            let l = gt.get(x, y);
            if l != 0 {
                values.extend_from_slice(cube.pixel(x, y));
                labels.push(l);
                coords.push((x, y));
            }
        }
    }
    if labels.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let pixels = Array2::from_shape_vec((labels.len(), cube.bands()), values).expect("row-major fill");
    PixelDataset::new(pixels, labels, coords)
}

/// Per-band minimum and maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MinMaxStats<T> {
    pub min: Array1<T>,
    pub max: Array1<T>,
}

impl<T: Scalar> MinMaxStats<T> {
    pub fn of(pixels: &Array2<T>) -> Result<Self> {
        if pixels.nrows() == 0 {
            return Err(DataError::EmptyDataset);
        }
        let fold = |f: fn(T, T) -> T| pixels.map_axis(Axis(0), |c| c.iter().copied().reduce(f).expect("non-empty"));
        Ok(Self {
            min: fold(T::min),
            max: fold(T::max),
        })
    }
}

/// Maps every band affinely onto [0, 1] with `stats` (computed from
/// `dataset` when absent). Values outside the stats range are clamped; a
/// band whose max equals its min maps to 0.
pub fn normalize_minmax<T: Scalar>(
    dataset: &PixelDataset<T>,
    stats: Option<&MinMaxStats<T>>,
) -> Result<(PixelDataset<T>, MinMaxStats<T>)> {
    let stats = match stats {
        Some(s) => s.clone(),
        None => MinMaxStats::of(&dataset.pixels)?,
    };
    let bands = dataset.band_count();
    if stats.min.len() != bands || stats.max.len() != bands {
        return Err(DataError::Shape(format!(
            "stats cover {} bands, data has {bands}",
            stats.min.len()
        )));
    }
    if let Some(b) = (0..bands).find(|&b| !(stats.max[b] >= stats.min[b])) {
        return Err(DataError::Shape(format!("band {b} has max < min")));
    }
    let mut pixels = dataset.pixels.clone();
    for (b, mut col) in pixels.columns_mut().into_iter().enumerate() {
        let (lo, hi) = (stats.min[b], stats.max[b]);
        let range = hi - lo;
        col.mapv_inplace(|v| {
            if range > T::zero() {
                ((v - lo) / range).max(T::zero()).min(T::one())
            } else {
                T::zero()
            }
        });
    }
    Ok((
        PixelDataset {
            pixels,
            labels: dataset.labels.clone(),
            coords: dataset.coords.clone(),
        },
        stats,
    ))
}

/// Fractions cut off at each split stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitRatios {
    /// Share of all pixels held out for testing.
    pub test: f64,
    /// Share of the remaining pixels held out for validation.
    pub validation: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            test: 0.2,
            validation: 0.2,
        }
    }
}

impl SplitRatios {
    /// `(train, validation, test)` sizes for `n` pixels. Each held-out part
    /// gets `max(1, floor(ratio · remaining))`, so rounding favors training.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        for r in [self.test, self.validation] {
            if !(r > 0.0 && r < 1.0) {
                return Err(DataError::Split(format!("ratio {r} must lie in (0, 1)")));
            }
        }
        if n < 5 {
            return Err(DataError::Split(format!("need at least 5 pixels to split, got {n}")));
        }
        let test = ((self.test * n as f64).floor() as usize).max(1);
        let rest = n - test;
        let val = ((self.validation * rest as f64).floor() as usize).max(1);
        if val >= rest {
            return Err(DataError::Split(format!("no training pixels left from {n}")));
        }
        Ok((rest - val, val, test))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitDataset<T> {
    pub train: PixelDataset<T>,
    pub validation: PixelDataset<T>,
    pub test: PixelDataset<T>,
    pub seed: u64,
}

/// Shuffles once with `seed`, holds out the tail as the test set, then
/// holds out the tail of the remainder as the validation set.
pub fn shuffle_split<T: Scalar>(dataset: &PixelDataset<T>, seed: u64, ratios: SplitRatios) -> Result<SplitDataset<T>> {
    let (n_train, n_val, _) = ratios.sizes(dataset.len())?;
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, rest) = order.split_at(n_train);
    let (validation, test) = rest.split_at(n_val);
    Ok(SplitDataset {
        train: dataset.select(train),
        validation: dataset.select(validation),
        test: dataset.select(test),
        seed,
    })
}
