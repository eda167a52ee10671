use std::ops::RangeInclusive;
use std::path::Path;

use ndarray::ArrayView2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::train::{train_rbm, Checkpoint, NegativePhase, RbmTrainConfig};
use super::{label_from_probs, BinaryLabel, RbmError, RbmModel, Result};
use crate::history::save_loss_csv;
use crate::metrics::{adjusted_rand, completeness, contingency, homogeneity, v_measure};
use crate::Scalar;

/// Hidden-probability thresholds tried when labeling.
pub const THRESHOLD_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// `{0, 0.01, …, 1}`
pub fn beta_grid() -> Vec<f64> {
    (0..=100).map(|k| k as f64 / 100.0).collect()
}

/// Labels every row of a binary visible matrix.
pub fn label_dataset<T: Scalar>(model: &RbmModel<T>, data: ArrayView2<T>, threshold: T) -> Result<Vec<BinaryLabel>> {
    if !(threshold > T::zero() && threshold < T::one()) {
        return Err(RbmError::ThresholdOutOfRange(threshold.as_f64()));
    }
    if data.ncols() != model.n_visible() {
        return Err(RbmError::LengthMismatch {
            expected: model.n_visible(),
            got: data.ncols(),
        });
    }
    let probs = model.hidden_probs_batch(data);
    Ok(probs
        .rows()
        .into_iter()
        .map(|r| label_from_probs(r.as_slice().expect("row-major"), threshold))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSelection {
    pub threshold: f64,
    pub adjusted_rand: f64,
    /// `(threshold, ARS)` for every grid point, in grid order.
    pub table: Vec<(f64, f64)>,
}

/// Picks the grid threshold whose labeling maximizes the adjusted Rand score
/// against `truth`; the lower threshold wins a tie.
pub fn select_threshold<T: Scalar, L: Ord + Clone>(
    model: &RbmModel<T>,
    data: ArrayView2<T>,
    truth: &[L],
) -> Result<ThresholdSelection> {
    if data.nrows() == 0 {
        return Err(RbmError::EmptyBatch);
    }
    let mut table = Vec::with_capacity(THRESHOLD_GRID.len());
    let mut best: Option<(f64, f64)> = None;
    for &th in &THRESHOLD_GRID {
        let labels = label_dataset(model, data, T::lit(th))?;
        let ars: f64 = adjusted_rand(&contingency(truth, &labels)?)?;
        table.push((th, ars));
        if best.is_none_or(|(_, b)| ars > b) {
            best = Some((th, ars));
        }
    }
    let (threshold, adjusted_rand) = best.expect("non-empty grid");
    Ok(ThresholdSelection {
        threshold,
        adjusted_rand,
        table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaChoice {
    pub beta: f64,
    pub v_measure: f64,
}

/// Grid β maximizing `V_β(h, c)`; among ties the smallest β, which weights
/// homogeneity most.
pub fn best_beta(h: f64, c: f64) -> Result<BetaChoice> {
    let mut best: Option<BetaChoice> = None;
    for beta in beta_grid() {
        let v = v_measure(h, c, beta)?;
        if best.is_none_or(|b| v > b.v_measure) {
            best = Some(BetaChoice { beta, v_measure: v });
        }
    }
    Ok(best.expect("non-empty grid"))
}

/// How well one model's labeling of an evaluation set matches the truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub threshold: f64,
    pub adjusted_rand: f64,
    pub homogeneity: f64,
    pub completeness: f64,
    pub beta: f64,
    pub v_measure: f64,
    pub distinct_labels: usize,
}

/// Labels `eval` at the ARS-best threshold and scores it by the best-β
/// V-measure.
pub fn score_model<T: Scalar, L: Ord + Clone>(model: &RbmModel<T>, eval: ArrayView2<T>, truth: &[L]) -> Result<ModelScore> {
    let sel = select_threshold(model, eval, truth)?;
    let labels = label_dataset(model, eval, T::lit(sel.threshold))?;
    let table = contingency(truth, &labels)?;
    let h: f64 = homogeneity(&table);
    let c: f64 = completeness(&table);
    let b = best_beta(h, c)?;
    Ok(ModelScore {
        threshold: sel.threshold,
        adjusted_rand: sel.adjusted_rand,
        homogeneity: h,
        completeness: c,
        beta: b.beta,
        v_measure: b.v_measure,
        distinct_labels: table.clusters(),
    })
}

/// The checkpoint with the highest V-measure on `eval` (earliest epoch on
/// ties), with its score.
pub fn select_checkpoint<T: Scalar, L: Ord + Clone>(
    checkpoints: &[Checkpoint<T>],
    eval: ArrayView2<T>,
    truth: &[L],
) -> Result<(usize, ModelScore)> {
    let mut best: Option<(usize, ModelScore)> = None;
    for (i, cp) in checkpoints.iter().enumerate() {
        let score = score_model(&cp.model, eval, truth)?;
        log::debug!("checkpoint epoch {}: V {:.4}", cp.epoch, score.v_measure);
        if best.as_ref().is_none_or(|(_, b)| score.v_measure > b.v_measure) {
            best = Some((i, score));
        }
    }
    best.ok_or_else(|| RbmError::InvalidConfig("no checkpoints to choose from".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureRun {
    pub n_hidden: usize,
    pub repeat: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub score: ModelScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureReport {
    pub runs: Vec<ArchitectureRun>,
    /// `(n_hidden, first-place finishes)` in ascending `n_hidden`.
    pub wins: Vec<(usize, usize)>,
    pub best_hidden: usize,
}

impl ArchitectureReport {
    pub fn wins_for(&self, n_hidden: usize) -> usize {
        self.wins
            .iter()
            .find(|(h, _)| *h == n_hidden)
            .map_or(0, |&(_, w)| w)
    }
}

/// Directory of one (width, repeat) run under a scan directory.
pub fn run_dir(root: &Path, n_hidden: usize, repeat: usize) -> std::path::PathBuf {
    root.join(format!("h{n_hidden:02}_r{repeat:02}"))
}

/// Trains one model per (hidden width, repeat), labels `eval` at the best
/// threshold, and scores it by its best-β V-measure. Within each repeat the
/// width with the highest V-measure scores a win (smaller width on ties);
/// the width with the most wins is selected, again preferring the smaller.
///
/// Repeat `r` trains with seed `config.seed + r`. With `runs_root`, every
/// run writes its checkpoints and `loss.csv` to [`run_dir`].
#[allow(clippy::too_many_arguments)]
pub fn select_architecture<T: Scalar, L: Ord + Clone + Sync>(
    train: ArrayView2<T>,
    validation: Option<ArrayView2<T>>,
    eval: ArrayView2<T>,
    truth: &[L],
    hidden: RangeInclusive<usize>,
    repeats: usize,
    config: &RbmTrainConfig,
    negative: &NegativePhase,
    runs_root: Option<&Path>,
) -> Result<ArchitectureReport> {
    if hidden.is_empty() || repeats == 0 {
        return Err(RbmError::InvalidConfig("need at least one width and one repeat".into()));
    }
    let n_visible = train.ncols();
    let jobs: Vec<(usize, usize)> = hidden
        .clone()
        .flat_map(|h| (0..repeats).map(move |r| (h, r)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(n_hidden, repeat)| -> Result<ArchitectureRun> {
            let cfg = RbmTrainConfig {
                seed: config.seed.wrapping_add(repeat as u64),
                ..config.clone()
            };
            let dir = runs_root.map(|root| run_dir(root, n_hidden, repeat));
            let init = cfg.initial_model::<T>(n_visible, n_hidden);
            let outcome = train_rbm(init, train, validation, &cfg, negative, dir.as_deref())?;
            if let Some(dir) = &dir {
                std::fs::create_dir_all(dir)?;
                save_loss_csv(&dir.join("loss.csv"), &outcome.history)?;
            }
            let score = score_model(&outcome.model, eval, truth)?;
            log::info!("rbm H={n_hidden} repeat {repeat}: th {:.1}, V {:.4}", score.threshold, score.v_measure);
            Ok(ArchitectureRun {
                n_hidden,
                repeat,
                seed: cfg.seed,
                score,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut wins: Vec<(usize, usize)> = hidden.clone().map(|h| (h, 0)).collect();
    for r in 0..repeats {
        let winner = runs
            .iter()
            .filter(|run| run.repeat == r)
            .fold(None::<&ArchitectureRun>, |best, run| match best {
                Some(b) if run.score.v_measure <= b.score.v_measure => Some(b),
                _ => Some(run),
            })
            .expect("every repeat has runs");
        wins[winner.n_hidden - hidden.start()].1 += 1;
    }
    let best_hidden = wins
        .iter()
        .copied()
        .reduce(|best, x| if x.1 > best.1 { x } else { best })
        .expect("non-empty range")
        .0;
    Ok(ArchitectureReport {
        runs,
        wins,
        best_hidden,
    })
}
