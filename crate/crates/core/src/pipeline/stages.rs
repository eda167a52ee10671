use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::BufWriter;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::run::{
    GridRecord, KMeansRecord, LbaeRecord, PreprocessRecord, RbmRecord, RunDir, ScanRecord, SegmentRecord,
};
use super::{PipelineConfig, PipelineError, Result, SegmentationMap};
use crate::clustering::{kmeans_repeated, merge_rbm_clusters, rbm_cluster_distance, KMeansReport, RbmDistanceMode};
use crate::data::{
    load_envi, load_ground_truth, mask_background, normalize_minmax, shuffle_split, GroundTruth, MinMaxStats,
    PixelDataset, SplitDataset,
};
use crate::history::save_loss_csv;
use crate::lbae::{
    evaluate_reconstruction, grid_search_lbae, load_lbae, save_lbae, train_lbae, Lbae, LbaeArchitecture,
    LbaeProvenance, LbaeTrainConfig,
};
use crate::metrics::ClusteringScores;
use crate::pipeline::Palette;
use crate::rbm::{
    label_dataset, load_rbm, save_rbm, select_architecture, select_checkpoint, BinaryLabel,
    Checkpoint, NegativePhase, RbmModel, TrainingProvenance,
};

/// Split names in the order they are written.
pub const SPLITS: [&str; 3] = ["train", "validation", "test"];

/// Band selection and scaling learned during preprocessing, needed to
/// bring any pixel of the scene into model space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessState {
    pub dropped_bands: BTreeSet<usize>,
    pub stats: MinMaxStats<f64>,
}

fn write_split(path: &Path, ds: &PixelDataset<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["x".to_string(), "y".into(), "label".into()];
    header.extend((0..ds.band_count()).map(|b| format!("b{b}")));
    w.write_record(&header)?;
    for (i, row) in ds.pixels.rows().into_iter().enumerate() {
        let (x, y) = ds.coords[i];
        let mut rec = vec![x.to_string(), y.to_string(), ds.labels[i].to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn read_split(path: &Path) -> Result<PixelDataset<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let bands = r.headers()?.len().saturating_sub(3);
    let (mut values, mut labels, mut coords) = (Vec::new(), Vec::new(), Vec::new());
    let bad = |what: &str| PipelineError::Format(format!("{}: bad {what}", path.display()));
    for rec in r.records() {
        let rec = rec?;
        let num = |i: usize| rec.get(i).ok_or_else(|| bad("row"));
        let x = num(0)?.parse().map_err(|_| bad("x"))?;
        let y = num(1)?.parse().map_err(|_| bad("y"))?;
        labels.push(num(2)?.parse().map_err(|_| bad("label"))?);
        coords.push((x, y));
        for b in 0..bands {
            values.push(num(3 + b)?.parse::<f64>().map_err(|_| bad("band value"))?);
        }
    }
    let pixels = Array2::from_shape_vec((labels.len(), bands), values).map_err(|e| bad(&e.to_string()))?;
    Ok(PixelDataset::new(pixels, labels, coords)?)
}

fn load_inputs(cfg: &PipelineConfig) -> Result<(crate::data::HyperCube<f64>, GroundTruth)> {
    let cube = load_envi(&cfg.resolve(&cfg.dataset.cube))?;
    let gt = load_ground_truth(&cfg.resolve(&cfg.dataset.ground_truth))?;
    Ok((cube, gt))
}

/// Band removal, background masking, seeded split and min-max scaling
/// fitted on the training split. Starts a fresh manifest.
pub fn preprocess(cfg: &PipelineConfig, run: &RunDir) -> Result<PreprocessRecord> {
    let (cube, gt) = load_inputs(cfg)?;
    let dropped = cfg.preprocess.resolve_noisy_bands(&cfg.base_dir)?;
    let kept = cube.remove_bands(&dropped)?;
    let fg = mask_background(&kept, &gt)?;
    let split_seed = cfg.stage_seed("split") ^ cfg.preprocess.seed;
    let raw = shuffle_split(&fg, split_seed, cfg.preprocess.ratios)?;
    let (train, stats) = normalize_minmax(&raw.train, None)?;
    let (validation, _) = normalize_minmax(&raw.validation, Some(&stats))?;
    let (test, _) = normalize_minmax(&raw.test, Some(&stats))?;
    for (name, ds) in SPLITS.iter().zip([&train, &validation, &test]) {
        write_split(&run.data().join(format!("{name}.csv")), ds)?;
    }
    let state = PreprocessState {
        dropped_bands: dropped.clone(),
        stats,
    };
    fs::write(run.data().join("stats.json"), serde_json::to_string_pretty(&state)?)?;

    let record = PreprocessRecord {
        cube: cfg.dataset.cube.display().to_string(),
        ground_truth: cfg.dataset.ground_truth.display().to_string(),
        scene: cfg.dataset.scene.clone(),
        split_seed,
        width: cube.width(),
        height: cube.height(),
        source_bands: cube.bands(),
        bands: kept.bands(),
        dropped_bands: dropped.into_iter().collect(),
        classes: gt.classes(),
        foreground: fg.len(),
        train: train.len(),
        validation: validation.len(),
        test: test.len(),
    };
    let manifest = super::run::Manifest {
        tag: cfg.tag.clone(),
        seed: cfg.seed,
        preprocess: Some(record.clone()),
        ..Default::default()
    };
    run.save_manifest(&manifest)?;
    run.record_provenance("preprocess")?;
    log::info!(
        "preprocess: {} bands, {} classes, {}/{}/{} pixels",
        record.bands,
        record.classes.len(),
        record.train,
        record.validation,
        record.test
    );
    Ok(record)
}

/// Reads the three normalized splits written by [`preprocess`].
pub fn load_splits(run: &RunDir) -> Result<SplitDataset<f64>> {
    let load = |name: &str| {
        let path = run.data().join(format!("{name}.csv"));
        if !path.exists() {
            return Err(PipelineError::MissingArtifact(path));
        }
        read_split(&path)
    };
    let seed = run.load_manifest()?.preprocess.map_or(0, |p| p.split_seed);
    Ok(SplitDataset {
        train: load("train")?,
        validation: load("validation")?,
        test: load("test")?,
        seed,
    })
}

pub fn load_state(run: &RunDir) -> Result<PreprocessState> {
    let path = run.data().join("stats.json");
    if !path.exists() {
        return Err(PipelineError::MissingArtifact(path));
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Every foreground pixel of the scene, band-reduced and scaled with the
/// training statistics, in row-major order.
pub fn load_foreground(cfg: &PipelineConfig, run: &RunDir) -> Result<(PixelDataset<f64>, GroundTruth)> {
    let state = load_state(run)?;
    let (cube, gt) = load_inputs(cfg)?;
    let fg = mask_background(&cube.remove_bands(&state.dropped_bands)?, &gt)?;
    let (scaled, _) = normalize_minmax(&fg, Some(&state.stats))?;
    Ok((scaled, gt))
}

fn require(path: PathBuf) -> Result<PathBuf> {
    if path.exists() {
        Ok(path)
    } else {
        Err(PipelineError::MissingArtifact(path))
    }
}

fn lbae_config(cfg: &PipelineConfig) -> LbaeTrainConfig {
    LbaeTrainConfig {
        batch_size: cfg.lbae.batch_size,
        learning_rate: cfg.lbae.learning_rate,
        epochs: cfg.lbae.epochs,
        seed: cfg.stage_seed("lbae"),
        optimizer: cfg.lbae.optimizer,
    }
}

fn architecture(cfg: &PipelineConfig, bands: usize) -> LbaeArchitecture {
    let [c1, c2, c3] = cfg.lbae.widths;
    LbaeArchitecture::with_widths(bands, c1, c2, c3)
}

/// Trains one LBAE with the configured batch size and learning rate and
/// saves it as the run's model.
pub fn train_lbae_stage(cfg: &PipelineConfig, run: &RunDir) -> Result<LbaeRecord> {
    let splits = load_splits(run)?;
    let tc = lbae_config(cfg);
    let arch = architecture(cfg, splits.train.band_count());
    let initial = Lbae::new(arch, tc.seed)?;
    let (model, history) = train_lbae(initial, splits.train.pixels.view(), Some(splits.validation.pixels.view()), &tc)?;
    let loss_path = run.metrics().join("lbae_loss.csv");
    save_loss_csv(&loss_path, &history)?;
    let (eu, sad) = evaluate_reconstruction(&model, splits.test.pixels.view())?;
    let prov = LbaeProvenance {
        config: Some(tc),
        final_train_loss: history.last().map(|r| r.train_loss),
        final_val_loss: history.last().and_then(|r| r.val_loss),
    };
    save_lbae(&run.lbae_model(), &model, &prov)?;
    let record = LbaeRecord {
        model: run.relative(&run.lbae_model()),
        loss: run.relative(&loss_path),
        seed: tc.seed,
        epochs: tc.epochs,
        batch_size: tc.batch_size,
        learning_rate: tc.learning_rate,
        optimizer: format!("{:?}", tc.optimizer).to_lowercase(),
        widths: cfg.lbae.widths,
        latent_len: model.latent_len(),
        final_train_loss: prov.final_train_loss,
        final_val_loss: prov.final_val_loss,
        test_euclidean: eu,
        test_sad: sad,
    };
    run.update_manifest(|m| m.lbae = Some(record.clone()))?;
    run.record_provenance("train-lbae")?;
    log::info!("train-lbae: test euclidean {eu:.5}, sad {sad:.5}");
    Ok(record)
}

/// Trains the 3 × 3 batch/learning-rate grid, writes every model and the
/// score table, and installs the winner as the run's LBAE.
pub fn grid_search_lbae_stage(cfg: &PipelineConfig, run: &RunDir) -> Result<GridRecord> {
    let splits = load_splits(run)?;
    let base = lbae_config(cfg);
    let arch = architecture(cfg, splits.train.band_count());
    let grid = grid_search_lbae(
        &arch,
        splits.train.pixels.view(),
        Some(splits.validation.pixels.view()),
        splits.test.pixels.view(),
        &base,
    )?;
    let mut models = Vec::new();
    for cell in &grid.cells {
        let stem = format!("lbae_b{}_lr{:e}", cell.batch_size, cell.learning_rate);
        let path = run.models().join(format!("{stem}.lbae.json"));
        let prov = LbaeProvenance {
            config: Some(LbaeTrainConfig {
                batch_size: cell.batch_size,
                learning_rate: cell.learning_rate,
                ..base
            }),
            final_train_loss: cell.history.last().map(|r| r.train_loss),
            final_val_loss: cell.history.last().and_then(|r| r.val_loss),
        };
        save_lbae(&path, &cell.model, &prov)?;
        save_loss_csv(&run.metrics().join(format!("{stem}_loss.csv")), &cell.history)?;
        models.push(run.relative(&path));
    }
    let table = run.metrics().join("lbae_grid.csv");
    grid.write_csv(File::create(&table)?)?;
    let best = grid.best();
    fs::copy(run.root().join(&models[grid.winner]), run.lbae_model())?;
    let record = GridRecord {
        table: run.relative(&table),
        winner_batch: best.batch_size,
        winner_learning_rate: best.learning_rate,
        models,
    };
    run.update_manifest(|m| m.lbae_grid = Some(record.clone()))?;
    run.record_provenance("grid-search-lbae")?;
    log::info!("grid-search-lbae: winner b={} lr={:e}", best.batch_size, best.learning_rate);
    Ok(record)
}

fn load_run_lbae(run: &RunDir) -> Result<Lbae<f64>> {
    Ok(load_lbae(&require(run.lbae_model())?)?.0)
}

/// Which RBM width(s) `train-rbm` trains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RbmPlan {
    /// One model; the checkpoint with the best validation V-measure is kept.
    Single(usize),
    /// Every width in the range, `repeats` times, scored on validation.
    Scan { hidden: RangeInclusive<usize>, repeats: usize },
}

/// Outcome of `train-rbm`.
#[derive(Debug, Clone, PartialEq)]
pub enum RbmStageResult {
    Single(RbmRecord),
    Scan(ScanRecord),
}

/// Encodes the splits through the run's LBAE and trains RBM(s) on the
/// training codes.
pub fn train_rbm_stage(cfg: &PipelineConfig, run: &RunDir, plan: &RbmPlan) -> Result<RbmStageResult> {
    let splits = load_splits(run)?;
    let lbae = load_run_lbae(run)?;
    let train = lbae.latent_codes(splits.train.pixels.view())?;
    let val = lbae.latent_codes(splits.validation.pixels.view())?;
    let tc = cfg.rbm_train_config();
    let negative = NegativePhase::from_config(&tc)?;
    match plan {
        RbmPlan::Single(h) => {
            let h = *h;
            let cp_dir = run.checkpoints().join(format!("rbm_h{h:02}"));
            let init = tc.initial_model::<f64>(train.ncols(), h);
            let outcome = crate::rbm::train_rbm(init, train.view(), Some(val.view()), &tc, &negative, Some(&cp_dir))?;
            let loss = run.metrics().join(format!("rbm_h{h:02}_loss.csv"));
            save_loss_csv(&loss, &outcome.history)?;
            let mut candidates = outcome.checkpoints.clone();
            if candidates.last().is_none_or(|c| c.epoch != tc.epochs) {
                candidates.push(Checkpoint {
                    epoch: tc.epochs,
                    model: outcome.model.clone(),
                });
            }
            let (best, score) = select_checkpoint(&candidates, val.view(), &splits.validation.labels)?;
            let chosen = &candidates[best];
            save_rbm(&run.rbm_model(), &chosen.model, &TrainingProvenance::from_config(&tc, chosen.epoch))?;
            let record = RbmRecord {
                model: run.relative(&run.rbm_model()),
                loss: run.relative(&loss),
                checkpoints: run.relative(&cp_dir),
                sampler: tc.sampler.to_string(),
                seed: tc.seed,
                n_hidden: h,
                epochs: tc.epochs,
                best_epoch: chosen.epoch,
                threshold: score.threshold,
                validation_adjusted_rand: score.adjusted_rand,
                validation_v_measure: score.v_measure,
                beta: score.beta,
            };
            run.update_manifest(|m| m.rbm = Some(record.clone()))?;
            run.record_provenance("train-rbm")?;
            log::info!(
                "train-rbm: H={h}, best epoch {} (V {:.4}, threshold {:.1})",
                chosen.epoch,
                score.v_measure,
                score.threshold
            );
            Ok(RbmStageResult::Single(record))
        }
        RbmPlan::Scan { hidden, repeats } => {
            let root = run.checkpoints().join("scan");
            let report = select_architecture(
                train.view(),
                Some(val.view()),
                val.view(),
                &splits.validation.labels,
                hidden.clone(),
                *repeats,
                &tc,
                &negative,
                Some(&root),
            )?;
            let table = run.metrics().join("rbm_scan.csv");
            let mut w = csv::Writer::from_path(&table)?;
            w.write_record([
                "n_hidden",
                "repeat",
                "seed",
                "threshold",
                "ars",
                "homogeneity",
                "completeness",
                "beta",
                "v_measure",
                "distinct_labels",
            ])?;
            for r in &report.runs {
                let s = &r.score;
                w.write_record([
                    r.n_hidden.to_string(),
                    r.repeat.to_string(),
                    r.seed.to_string(),
                    s.threshold.to_string(),
                    s.adjusted_rand.to_string(),
                    s.homogeneity.to_string(),
                    s.completeness.to_string(),
                    s.beta.to_string(),
                    s.v_measure.to_string(),
                    s.distinct_labels.to_string(),
                ])?;
            }
            w.flush()?;
            let wins = run.metrics().join("rbm_scan_wins.csv");
            let mut w = csv::Writer::from_path(&wins)?;
            w.write_record(["n_hidden", "wins"])?;
            for (h, n) in &report.wins {
                w.write_record([h.to_string(), n.to_string()])?;
            }
            w.flush()?;
            let record = ScanRecord {
                table: run.relative(&table),
                wins: run.relative(&wins),
                runs_root: run.relative(&root),
                hidden_min: *hidden.start(),
                hidden_max: *hidden.end(),
                repeats: *repeats,
                runs: report.runs.len(),
                best_hidden: report.best_hidden,
            };
            run.update_manifest(|m| m.rbm_scan = Some(record.clone()))?;
            run.record_provenance("train-rbm-scan")?;
            log::info!("train-rbm scan: best H = {}", report.best_hidden);
            Ok(RbmStageResult::Scan(record))
        }
    }
}

/// Optional AHC merge applied by `segment`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AhcOptions {
    pub linkage: crate::clustering::Linkage,
    pub distance: RbmDistanceMode,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SegmentOptions {
    /// RBM model file; defaults to the run's selected model.
    pub model: Option<PathBuf>,
    /// Hidden-unit threshold; defaults to the one chosen by `train-rbm`.
    pub threshold: Option<f64>,
    pub ahc: Option<AhcOptions>,
}

/// Labels every foreground pixel with the RBM (and optionally merges the
/// labels with AHC), then writes `maps/segmentation.segm` and its PNG.
///
/// Without AHC, segment ids follow the sorted order of the distinct RBM
/// labels; with AHC they are the merged cluster ids. Ids start at 1 and
/// background pixels keep 0.
pub fn segment_stage(cfg: &PipelineConfig, run: &RunDir, opts: &SegmentOptions) -> Result<(SegmentationMap, SegmentRecord)> {
    let (fg, gt) = load_foreground(cfg, run)?;
    let lbae = load_run_lbae(run)?;
    let model_path = match &opts.model {
        Some(p) => p.clone(),
        None => require(run.rbm_model())?,
    };
    let (rbm, _): (RbmModel<f64>, _) = load_rbm(&model_path)?;
    let threshold = match opts.threshold {
        Some(t) => t,
        None => run.load_manifest()?.rbm.map_or(0.5, |r| r.threshold),
    };
    let codes = lbae.latent_codes(fg.pixels.view())?;
    let labels = label_dataset(&rbm, codes.view(), threshold)?;
    let distinct: BTreeSet<&BinaryLabel> = labels.iter().collect();
    let rbm_labels = distinct.len();

    let segment_ids: Vec<usize> = match opts.ahc {
        Some(a) if rbm_labels > 1 => {
            let clusters = rbm_cluster_distance(&labels, fg.pixels.view(), a.distance)?;
            let (merged, dendrogram) = merge_rbm_clusters(&clusters, a.linkage, a.k)?;
            dendrogram.write_csv(&run.maps().join("dendrogram.csv"))?;
            merged
        }
        _ => {
            let order: Vec<&BinaryLabel> = distinct.into_iter().collect();
            labels.iter().map(|l| order.binary_search(&l).expect("label is present")).collect()
        }
    };
    let mut raster = vec![0u32; gt.width() * gt.height()];
    for (i, &(x, y)) in fg.coords.iter().enumerate() {
        raster[y * gt.width() + x] = segment_ids[i] as u32 + 1;
    }
    let map = SegmentationMap::from_labels(gt.width(), gt.height(), &raster)?;
    map.check_partition(&gt)?;
    let raster_path = run.maps().join("segmentation.segm");
    let png_path = run.maps().join("segmentation.png");
    map.save(&raster_path)?;
    map.render_png(&png_path, &Palette::bundled())?;
    let record = SegmentRecord {
        raster: run.relative(&raster_path),
        png: run.relative(&png_path),
        rbm_model: run.relative(&model_path),
        threshold,
        rbm_labels,
        segments: map.segments().len(),
        linkage: opts.ahc.map(|a| format!("{:?}", a.linkage).to_lowercase()),
        distance: opts.ahc.map(|a| format!("{:?}", a.distance)),
        k: opts.ahc.map(|a| a.k),
    };
    run.update_manifest(|m| m.segment = Some(record.clone()))?;
    run.record_provenance("segment")?;
    log::info!("segment: {rbm_labels} RBM labels, {} segments", record.segments);
    Ok((map, record))
}

/// Reads a label raster: a `.segm` file, or anything [`load_ground_truth`]
/// accepts.
pub fn load_label_raster(path: &Path) -> Result<GroundTruth> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("segm")) {
        let m = SegmentationMap::load(path)?;
        Ok(GroundTruth::new(m.width, m.height, m.labels.iter().map(|&l| l as u32).collect())?)
    } else {
        Ok(load_ground_truth(path)?)
    }
}

/// Scores `pred` against `truth` over the pixels where `truth` is not
/// background.
pub fn evaluate_rasters(pred: &GroundTruth, truth: &GroundTruth) -> Result<ClusteringScores> {
    if (pred.width(), pred.height()) != (truth.width(), truth.height()) {
        return Err(PipelineError::Raster(format!(
            "prediction is {}x{} but truth is {}x{}",
            pred.width(),
            pred.height(),
            truth.width(),
            truth.height()
        )));
    }
    let (t, p): (Vec<u32>, Vec<u32>) = truth
        .labels()
        .iter()
        .zip(pred.labels())
        .filter(|(&t, _)| t != 0)
        .map(|(&t, &p)| (t, p))
        .unzip();
    Ok(ClusteringScores::compute(&t, &p)?)
}

/// Writes a one-row `homogeneity,completeness,ars,rand_score` CSV.
pub fn write_scores_csv(path: &Path, scores: &ClusteringScores) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ClusteringScores::FIELDS)?;
    w.write_record(scores.values().map(|v| v.to_string()))?;
    w.flush()?;
    Ok(())
}

pub fn scores_json(scores: &ClusteringScores) -> Result<String> {
    let fields: serde_json::Map<String, serde_json::Value> = ClusteringScores::FIELDS
        .iter()
        .zip(scores.values())
        .map(|(k, v)| (k.to_string(), serde_json::Value::from(v)))
        .collect();
    Ok(serde_json::to_string_pretty(&fields)?)
}

/// k-means on every foreground pixel (raw spectra, or their LBAE codes
/// with `latent`), once per seed, scored against the ground truth.
pub fn baseline_kmeans_stage(cfg: &PipelineConfig, run: &RunDir, latent: bool) -> Result<(KMeansReport, KMeansRecord)> {
    let (fg, _) = load_foreground(cfg, run)?;
    let data: Array2<f64> = if latent {
        load_run_lbae(run)?.latent_codes(fg.pixels.view())?
    } else {
        fg.pixels.clone()
    };
    let base = cfg.stage_seed("kmeans");
    let seeds: Vec<u64> = (0..cfg.kmeans.runs as u64).map(|i| base.wrapping_add(i)).collect();
    let report = kmeans_repeated(data.view(), &fg.labels, cfg.kmeans.k, &seeds, cfg.kmeans.max_iters)?;
    let name = if latent { "kmeans_latent" } else { "kmeans_raw" };
    let table = run.metrics().join(format!("{name}.csv"));
    let mut w = csv::Writer::from_path(&table)?;
    let mut header = vec!["seed"];
    header.extend(ClusteringScores::FIELDS);
    w.write_record(&header)?;
    for (seed, s) in &report.runs {
        let mut rec = vec![seed.to_string()];
        rec.extend(s.values().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let summary = run.metrics().join(format!("{name}_summary.csv"));
    let mut w = csv::Writer::from_path(&summary)?;
    w.write_record(["metric", "mean", "std"])?;
    for (m, mean, std) in report.summary_rows() {
        w.write_record([m.to_string(), mean.to_string(), std.to_string()])?;
    }
    w.flush()?;
    let record = KMeansRecord {
        table: run.relative(&table),
        summary: run.relative(&summary),
        k: cfg.kmeans.k,
        seeds,
        mean: report.mean,
        std: report.std,
    };
    run.update_manifest(|m| {
        if latent {
            m.kmeans_latent = Some(record.clone());
        } else {
            m.kmeans_raw = Some(record.clone());
        }
    })?;
    run.record_provenance(name)?;
    Ok((report, record))
}

/// Everything `run` produced, for reporting.
#[derive(Debug, Clone)]
pub struct PipelineSummary {
    pub segmentation: ClusteringScores,
    pub kmeans_raw: KMeansReport,
    pub map: SegmentationMap,
}

/// preprocess → train-lbae → train-rbm (configured width) → segment (AHC
/// when enabled) → evaluate against the ground truth, plus the raw k-means
/// baseline. Scores go to `metrics/segmentation.{csv,json}`.
pub fn run_pipeline(cfg: &PipelineConfig, run: &RunDir) -> Result<PipelineSummary> {
    preprocess(cfg, run)?;
    train_lbae_stage(cfg, run)?;
    train_rbm_stage(cfg, run, &RbmPlan::Single(cfg.rbm.hidden))?;
    let ahc = cfg.ahc.enabled.then_some(AhcOptions {
        linkage: cfg.ahc.linkage,
        distance: cfg.ahc.distance,
        k: cfg.ahc.k,
    });
    let (map, _) = segment_stage(
        cfg,
        run,
        &SegmentOptions {
            ahc,
            ..Default::default()
        },
    )?;
    let gt = load_ground_truth(&cfg.resolve(&cfg.dataset.ground_truth))?;
    let pred = GroundTruth::new(map.width, map.height, map.labels.iter().map(|&l| l as u32).collect())?;
    let segmentation = evaluate_rasters(&pred, &gt)?;
    write_scores_csv(&run.metrics().join("segmentation.csv"), &segmentation)?;
    fs::write(run.metrics().join("segmentation.json"), scores_json(&segmentation)?)?;
    let (kmeans_raw, _) = baseline_kmeans_stage(cfg, run, false)?;
    Ok(PipelineSummary {
        segmentation,
        kmeans_raw,
        map,
    })
}
