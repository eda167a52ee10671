use ndarray::{ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{LatentMode, Lbae, LbaeArchitecture};
use super::{LbaeError, Result};
use crate::history::LossRecord;
use crate::metrics::{euclidean, spectral_angle};
use crate::Scalar;

pub const BATCH_GRID: [usize; 3] = [4, 8, 16];
pub const LR_GRID: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Parameter update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    /// `θ ← θ − η·g`
    #[default]
    Sgd,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    Adam,
}

impl std::str::FromStr for Optimizer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sgd" => Ok(Self::Sgd),
            "adam" => Ok(Self::Adam),
            other => Err(format!("unknown optimizer `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LbaeTrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
}

/// Optimizer state carried across steps.
enum Stepper<T> {
    Sgd,
    Adam { m: Vec<T>, v: Vec<T>, t: i32 },
}

impl<T: Scalar> Stepper<T> {
    fn new(kind: Optimizer, n: usize) -> Self {
        match kind {
            Optimizer::Sgd => Self::Sgd,
            Optimizer::Adam => Self::Adam {
                m: vec![T::zero(); n],
                v: vec![T::zero(); n],
                t: 0,
            },
        }
    }

    /// Turns a gradient into the step to subtract, in place.
    fn direction(&mut self, grad: &mut [T]) {
        let Self::Adam { m, v, t } = self else { return };
        let (b1, b2, eps) = (T::lit(0.9), T::lit(0.999), T::lit(1e-8));
        *t += 1;
        let c1 = T::one() - b1.powi(*t);
        let c2 = T::one() - b2.powi(*t);
        for ((g, mi), vi) in grad.iter_mut().zip(m.iter_mut()).zip(v.iter_mut()) {
            *mi = b1 * *mi + (T::one() - b1) * *g;
            *vi = b2 * *vi + (T::one() - b2) * *g * *g;
            *g = (*mi / c1) / ((*vi / c2).sqrt() + eps);
        }
    }
}

impl Default for LbaeTrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 4,
            learning_rate: 1e-3,
            epochs: 50,
            seed: 0,
            optimizer: Optimizer::Sgd,
        }
    }
}

impl LbaeTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(LbaeError::InvalidConfig("batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(LbaeError::InvalidConfig(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Minibatch gradient descent on the reconstruction MSE with straight-through gradients.
///
/// Rows are reshuffled every epoch from a stream derived from
/// `config.seed`. After each epoch the full training set (and `validation`,
/// when given) is re-evaluated with the binarized forward pass and recorded
/// in the history.
pub fn train_lbae<T: Scalar>(
    initial: Lbae<T>,
    train: ArrayView2<T>,
    validation: Option<ArrayView2<T>>,
    config: &LbaeTrainConfig,
) -> Result<(Lbae<T>, Vec<LossRecord>)> {
    config.validate()?;
    if train.nrows() == 0 {
        return Err(LbaeError::EmptyData);
    }
    let mut model = initial;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let lr = T::lit(config.learning_rate);
    let mut order: Vec<usize> = (0..train.nrows()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    let mut stepper = Stepper::new(config.optimizer, model.n_params());
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch = train.select(Axis(0), chunk);
            let (_, mut grad) = model.loss_and_gradient(batch.view(), LatentMode::StraightThrough)?;
            stepper.direction(&mut grad);
            model.sgd_step(&grad, lr);
        }
        if !model.is_finite() {
            return Err(LbaeError::NonFinite { epoch });
        }
        let train_loss = model.mse(train)?.as_f64();
        let val_loss = validation.map(|v| model.mse(v)).transpose()?.map(Scalar::as_f64);
        log::debug!("lbae epoch {epoch}: train {train_loss:.6} val {val_loss:?}");
        history.push(LossRecord {
            epoch,
            train_loss,
            val_loss,
        });
    }
    Ok((model, history))
}

/// Mean Euclidean distance and mean spectral angle between matching rows.
pub fn reconstruction_metrics<T: Scalar>(original: ArrayView2<T>, reconstructed: ArrayView2<T>) -> Result<(T, T)> {
    if original.dim() != reconstructed.dim() {
        return Err(LbaeError::InvalidConfig(format!(
            "shape mismatch: {:?} vs {:?}",
            original.dim(),
            reconstructed.dim()
        )));
    }
    if original.nrows() == 0 {
        return Err(LbaeError::EmptyData);
    }
    let mut eu = T::zero();
    let mut sad = T::zero();
    for (x, r) in original.rows().into_iter().zip(reconstructed.rows()) {
        let (x, r) = (x.to_vec(), r.to_vec());
        eu += euclidean(&x, &r);
        sad += spectral_angle(&x, &r)?;
    }
    let n = T::from_count(original.nrows());
    Ok((eu / n, sad / n))
}

/// Reconstructs `data` through `model` and scores it.
pub fn evaluate_reconstruction<T: Scalar>(model: &Lbae<T>, data: ArrayView2<T>) -> Result<(T, T)> {
    let rec = model.reconstruct_batch(data)?;
    reconstruction_metrics(data, rec.view())
}

/// One trained cell of the batch-size × learning-rate grid.
#[derive(Debug, Clone)]
pub struct GridCell<T> {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub euclidean: f64,
    pub sad: f64,
    pub model: Lbae<T>,
    pub history: Vec<LossRecord>,
}

#[derive(Debug, Clone)]
pub struct GridSearch<T> {
    pub cells: Vec<GridCell<T>>,
    pub winner: usize,
}

impl<T> GridSearch<T> {
    pub fn best(&self) -> &GridCell<T> {
        &self.cells[self.winner]
    }

    /// CSV with columns `batch,lr,euclidean,sad,winner`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["batch", "lr", "euclidean", "sad", "winner"])?;
        for (i, c) in self.cells.iter().enumerate() {
            w.write_record([
                c.batch_size.to_string(),
                c.learning_rate.to_string(),
                c.euclidean.to_string(),
                c.sad.to_string(),
                u8::from(i == self.winner).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Picks the grid winner from `(batch, euclidean, sad)` triples.
///
/// A cell that is no worse than every other cell on both metrics wins
/// outright. Otherwise the cell with the smallest sum of its two ranks wins.
/// Remaining ties go to the lower SAD, then the smaller batch, then the
/// earlier cell.
pub fn select_grid_winner(cells: &[(usize, f64, f64)]) -> Option<usize> {
    let better = |a: usize, b: usize, key: &dyn Fn(usize) -> f64| {
        let (ka, kb) = (key(a), key(b));
        ka.total_cmp(&kb)
            .then(cells[a].2.total_cmp(&cells[b].2))
            .then(cells[a].0.cmp(&cells[b].0))
            .then(a.cmp(&b))
    };
    let idx = 0..cells.len();
    let dominant = idx
        .clone()
        .filter(|&i| cells.iter().all(|c| cells[i].1 <= c.1 && cells[i].2 <= c.2))
        .min_by(|&a, &b| better(a, b, &|_| 0.0));
    if dominant.is_some() {
        return dominant;
    }
    // rank = number of cells strictly better on that metric
    let rank = |i: usize| {
        let eu = cells.iter().filter(|c| c.1 < cells[i].1).count();
        let sad = cells.iter().filter(|c| c.2 < cells[i].2).count();
        (eu + sad) as f64
    };
    idx.min_by(|&a, &b| better(a, b, &rank))
}

/// Trains one model per (batch, learning rate) pair from the same
/// initialization and scores each on `test`. Epochs, seed and optimizer
/// come from `base`; its batch size and learning rate are ignored.
pub fn grid_search_lbae<T: Scalar>(
    architecture: &LbaeArchitecture,
    train: ArrayView2<T>,
    validation: Option<ArrayView2<T>>,
    test: ArrayView2<T>,
    base: &LbaeTrainConfig,
) -> Result<GridSearch<T>> {
    let initial = Lbae::new(architecture.clone(), base.seed)?;
    let mut cells = Vec::with_capacity(BATCH_GRID.len() * LR_GRID.len());
    for &batch_size in &BATCH_GRID {
        for &learning_rate in &LR_GRID {
            let config = LbaeTrainConfig {
                batch_size,
                learning_rate,
                ..*base
            };
            let (model, history) = train_lbae(initial.clone(), train, validation, &config)?;
            let (eu, sad) = evaluate_reconstruction(&model, test)?;
            log::info!(
                "lbae grid b={batch_size} lr={learning_rate:e}: euclidean {:.5} sad {:.5}",
                eu.as_f64(),
                sad.as_f64()
            );
            cells.push(GridCell {
                batch_size,
                learning_rate,
                euclidean: eu.as_f64(),
                sad: sad.as_f64(),
                model,
                history,
            });
        }
    }
    let triples: Vec<_> = cells.iter().map(|c| (c.batch_size, c.euclidean, c.sad)).collect();
    let winner = select_grid_winner(&triples).expect("grid is non-empty");
    Ok(GridSearch { cells, winner })
}
