use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::io::{checkpoint_path, save_rbm, TrainingProvenance};
use super::{RbmError, RbmModel, Result};
use crate::samplers::{
    exact_boltzmann, negative_phase, rbm_to_qubo, sa_sample, AnnealSchedule, PhaseStatistics, RemoteSampler,
};
use crate::history::LossRecord;
use crate::Scalar;

/// Where the model expectation of the gradient comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// One Gibbs step from each data vector.
    #[default]
    Cd1,
    /// Simulated annealing on the model's QUBO.
    Sa,
    /// Exact enumeration of the joint distribution.
    Exact,
    /// An annealing service speaking the `/sample` protocol.
    Remote,
}

impl SamplerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cd1 => "cd1",
            Self::Sa => "sa",
            Self::Exact => "exact",
            Self::Remote => "remote",
        }
    }
}

impl FromStr for SamplerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cd" | "cd1" | "cd-1" => Ok(Self::Cd1),
            "sa" | "anneal" => Ok(Self::Sa),
            "exact" => Ok(Self::Exact),
            "remote" | "qa" => Ok(Self::Remote),
            other => Err(format!("unknown sampler `{other}` (expected cd1, sa, exact or remote)")),
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_anneal() -> AnnealSchedule {
    AnnealSchedule {
        beta_end: 1.0,
        ..AnnealSchedule::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RbmTrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub sampler: SamplerKind,
    /// Reads requested per batch from a sampler-based negative phase.
    pub num_reads: usize,
    pub checkpoint_every: usize,
    pub seed: u64,
    /// Standard deviation of the initial Gaussian weights.
    pub init_sigma: f64,
    /// Schedule for `sa`; the final inverse temperature is the one the
    /// samples are taken to represent.
    pub anneal: AnnealSchedule,
    pub remote_endpoint: Option<String>,
    pub remote_timeout_secs: f64,
}

impl Default for RbmTrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            epochs: 1000,
            batch_size: 64,
            sampler: SamplerKind::Cd1,
            num_reads: 100,
            checkpoint_every: 100,
            seed: 0,
            init_sigma: 0.01,
            anneal: default_anneal(),
            remote_endpoint: None,
            remote_timeout_secs: 60.0,
        }
    }
}

impl RbmTrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(RbmError::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if self.batch_size == 0 || self.num_reads == 0 || self.checkpoint_every == 0 {
            return bad("batch_size, num_reads and checkpoint_every must be positive");
        }
        if !(self.init_sigma >= 0.0 && self.init_sigma.is_finite()) {
            return bad("init_sigma must be a finite non-negative number");
        }
        if !(self.remote_timeout_secs > 0.0 && self.remote_timeout_secs.is_finite()) {
            return bad("remote_timeout_secs must be positive");
        }
        self.anneal.validate()?;
        Ok(())
    }

    /// Gaussian-initialized model drawn from this config's seed.
    pub fn initial_model<T: Scalar>(&self, n_visible: usize, n_hidden: usize) -> RbmModel<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        RbmModel::random(n_visible, n_hidden, self.init_sigma, &mut rng)
    }
}

/// A configured negative-phase backend.
#[derive(Debug, Clone)]
pub enum NegativePhase {
    Cd1,
    Exact,
    Anneal { schedule: AnnealSchedule, num_reads: usize },
    Remote { client: RemoteSampler, num_reads: usize },
}

impl NegativePhase {
    pub fn from_config(config: &RbmTrainConfig) -> Result<Self> {
        Ok(match config.sampler {
            SamplerKind::Cd1 => Self::Cd1,
            SamplerKind::Exact => Self::Exact,
            SamplerKind::Sa => Self::Anneal {
                schedule: config.anneal,
                num_reads: config.num_reads,
            },
            SamplerKind::Remote => {
                let endpoint = config
                    .remote_endpoint
                    .clone()
                    .ok_or_else(|| RbmError::InvalidConfig("remote sampler needs an endpoint".into()))?;
                Self::Remote {
                    client: RemoteSampler::new(endpoint, Duration::from_secs_f64(config.remote_timeout_secs)),
                    num_reads: config.num_reads,
                }
            }
        })
    }

    pub fn kind(&self) -> SamplerKind {
        match self {
            Self::Cd1 => SamplerKind::Cd1,
            Self::Exact => SamplerKind::Exact,
            Self::Anneal { .. } => SamplerKind::Sa,
            Self::Remote { .. } => SamplerKind::Remote,
        }
    }

    fn statistics<T: Scalar>(
        &self,
        model: &RbmModel<T>,
        batch: ArrayView2<T>,
        rng: &mut ChaCha8Rng,
    ) -> std::result::Result<PhaseStatistics<T>, crate::samplers::SamplerError> {
        let (nv, nh) = (model.n_visible(), model.n_hidden());
        match self {
            Self::Cd1 => Ok(cd1_negative(model, batch, rng)),
            Self::Exact => exact_boltzmann(&rbm_to_qubo(model), T::one())?.rbm_statistics(nv, nh),
            Self::Anneal { schedule, num_reads } => {
                let set = sa_sample(&rbm_to_qubo(model), schedule, *num_reads, rng.random())?;
                negative_phase(&set, nv, nh)
            }
            Self::Remote { client, num_reads } => {
                let set = client.sample(&rbm_to_qubo(model), *num_reads, rng.random())?;
                negative_phase(&set, nv, nh)
            }
        }
    }
}

/// Parameter update direction `positive − negative`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub weights: Array2<T>,
    pub visible_bias: Array1<T>,
    pub hidden_bias: Array1<T>,
}

impl<T: Scalar> Gradient<T> {
    pub fn between(positive: &PhaseStatistics<T>, negative: &PhaseStatistics<T>) -> Self {
        Self {
            weights: &positive.vh - &negative.vh,
            visible_bias: &positive.v - &negative.v,
            hidden_bias: &positive.h - &negative.h,
        }
    }

    fn apply(&self, model: &mut RbmModel<T>, lr: T) {
        model.weights.scaled_add(lr, &self.weights);
        model.visible_bias.scaled_add(lr, &self.visible_bias);
        model.hidden_bias.scaled_add(lr, &self.hidden_bias);
    }
}

fn check_batch<T: Scalar>(model: &RbmModel<T>, batch: ArrayView2<T>) -> Result<()> {
    if batch.nrows() == 0 {
        return Err(RbmError::EmptyBatch);
    }
    if batch.ncols() != model.n_visible() {
        return Err(RbmError::LengthMismatch {
            expected: model.n_visible(),
            got: batch.ncols(),
        });
    }
    if batch.iter().any(|&x| x != T::zero() && x != T::one()) {
        return Err(RbmError::NotBinary);
    }
    Ok(())
}

fn statistics<T: Scalar>(v: ArrayView2<T>, ph: ArrayView2<T>) -> PhaseStatistics<T> {
    let n = T::from_count(v.nrows());
    PhaseStatistics {
        vh: v.t().dot(&ph) / n,
        v: v.sum_axis(Axis(0)) / n,
        h: ph.sum_axis(Axis(0)) / n,
    }
}

fn bernoulli<T: Scalar, R: Rng + ?Sized>(probs: &Array2<T>, rng: &mut R) -> Array2<T> {
    probs.mapv(|p| if T::lit(rng.random::<f64>()) < p { T::one() } else { T::zero() })
}

/// Data statistics `⟨v P(h|v)ᵀ⟩, ⟨v⟩, ⟨P(h|v)⟩` over a binary batch.
pub fn positive_phase<T: Scalar>(model: &RbmModel<T>, batch: ArrayView2<T>) -> Result<PhaseStatistics<T>> {
    check_batch(model, batch)?;
    Ok(statistics(batch, model.hidden_probs_batch(batch).view()))
}

fn cd1_negative<T: Scalar, R: Rng + ?Sized>(model: &RbmModel<T>, batch: ArrayView2<T>, rng: &mut R) -> PhaseStatistics<T> {
    let h = bernoulli(&model.hidden_probs_batch(batch), rng);
    let v1 = bernoulli(&model.visible_probs_batch(h.view()), rng);
    let ph1 = model.hidden_probs_batch(v1.view());
    statistics(v1.view(), ph1.view())
}

/// CD-1 gradient estimate: one Gibbs step `v → h → v′` per row, with
/// hidden probabilities (not samples) in both statistics.
pub fn cd1_update<T: Scalar, R: Rng + ?Sized>(model: &RbmModel<T>, batch: ArrayView2<T>, rng: &mut R) -> Result<Gradient<T>> {
    let positive = positive_phase(model, batch)?;
    let negative = cd1_negative(model, batch, rng);
    Ok(Gradient::between(&positive, &negative))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint<T> {
    pub epoch: usize,
    pub model: RbmModel<T>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub model: RbmModel<T>,
    pub history: Vec<LossRecord>,
    pub checkpoints: Vec<Checkpoint<T>>,
}

/// Mini-batch gradient ascent on the log-likelihood.
///
/// Rows are reshuffled every epoch. After each epoch the reconstruction loss
/// of both splits is recorded; every `checkpoint_every` epochs the model is
/// kept in the outcome and, if `checkpoint_dir` is given, written there as
/// `<epoch>.rbm.json`.
pub fn train_rbm<T: Scalar>(
    initial: RbmModel<T>,
    train: ArrayView2<T>,
    validation: Option<ArrayView2<T>>,
    config: &RbmTrainConfig,
    negative: &NegativePhase,
    checkpoint_dir: Option<&Path>,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    let mut model = initial;
    let mut history = Vec::with_capacity(config.epochs);
    let mut checkpoints = Vec::new();
    if config.epochs == 0 {
        return Ok(TrainOutcome {
            model,
            history,
            checkpoints,
        });
    }
    check_batch(&model, train)?;
    if let Some(val) = validation {
        if val.nrows() > 0 {
            check_batch(&model, val)?;
        }
    }
    if let Some(dir) = checkpoint_dir {
        std::fs::create_dir_all(dir)?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let lr = T::lit(config.learning_rate);
    let mut order: Vec<usize> = (0..train.nrows()).collect();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for idx in order.chunks(config.batch_size) {
            let batch = train.select(Axis(0), idx);
            let positive = statistics(batch.view(), model.hidden_probs_batch(batch.view()).view());
            let negative = negative
                .statistics(&model, batch.view(), &mut rng)
                .map_err(|source| RbmError::Sampler { epoch, source })?;
            Gradient::between(&positive, &negative).apply(&mut model, lr);
        }
        if !model.is_finite() {
            return Err(RbmError::NonFinite { epoch });
        }
        let record = LossRecord {
            epoch,
            train_loss: model.reconstruction_loss(train).as_f64(),
            val_loss: validation
                .filter(|v| v.nrows() > 0)
                .map(|v| model.reconstruction_loss(v).as_f64()),
        };
        if epoch % config.checkpoint_every == 0 {
            log::info!(
                "rbm epoch {epoch}/{}: train loss {:.5}{}",
                config.epochs,
                record.train_loss,
                record.val_loss.map(|v| format!(", val loss {v:.5}")).unwrap_or_default()
            );
            if let Some(dir) = checkpoint_dir {
                let provenance = TrainingProvenance::from_config(config, epoch);
                save_rbm(&checkpoint_path(dir, epoch), &model, &provenance)?;
            }
            checkpoints.push(Checkpoint {
                epoch,
                model: model.clone(),
            });
        }
        history.push(record);
    }
    Ok(TrainOutcome {
        model,
        history,
        checkpoints,
    })
}
