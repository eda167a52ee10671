use std::fs;
use std::net::SocketAddr;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use hsiseg::clustering::{Linkage, RbmDistanceMode};
use hsiseg::lbae::Optimizer;
use hsiseg::pipeline::{
    baseline_kmeans_stage, evaluate_rasters, grid_search_lbae_stage, load_label_raster, preprocess, run_pipeline,
    scores_json, segment_stage, train_lbae_stage, train_rbm_stage, write_scores_csv, write_synthetic_scene,
    AhcOptions, PipelineConfig, RbmPlan, RbmStageResult, RunDir, SegmentOptions, SynthConfig, ANNEAL_ENDPOINT_VAR,
};
use hsiseg::rbm::SamplerKind;
use hsiseg::samplers::stub::{serve_blocking, StubConfig};
use hsiseg::samplers::AnnealSchedule;

#[derive(Parser)]
#[command(name = "hsiseg", version, about = "Hyperspectral segmentation with LBAE codes, RBM labels and AHC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Pipeline config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Run directory. Defaults to the config's `output_dir`, else the newest
    /// `runs/*-<tag>` next to the config (a new one for `preprocess`/`run`).
    #[arg(long)]
    run: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Drop noisy bands, mask background, split and scale.
    Preprocess {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train one LBAE.
    TrainLbae {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        optimizer: Option<Optimizer>,
    },
    /// Train the 3 × 3 batch/learning-rate grid and keep the winner.
    GridSearchLbae {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Train an RBM on LBAE codes, or scan hidden widths.
    TrainRbm {
        #[command(flatten)]
        run: RunArgs,
        /// cd, sa, exact or remote
        #[arg(long)]
        sampler: Option<SamplerKind>,
        #[arg(long, conflicts_with = "scan")]
        hidden: Option<usize>,
        /// Inclusive width range such as `3..28`.
        #[arg(long, value_parser = parse_range)]
        scan: Option<RangeInclusive<usize>>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Remote sampler URL; falls back to the config, then ANNEAL_ENDPOINT.
        #[arg(long)]
        endpoint: Option<String>,
    },
    /// Label the scene and write the SEGM raster and PNG.
    Segment {
        #[command(flatten)]
        run: RunArgs,
        /// RBM model file (default: the run's selected model).
        #[arg(long)]
        model: Option<PathBuf>,
        /// Merge RBM labels with this linkage (complete or average).
        #[arg(long)]
        ahc: Option<Linkage>,
        /// hamming, euclidean or sad
        #[arg(long, requires = "ahc")]
        distance: Option<RbmDistanceMode>,
        #[arg(long, requires = "ahc")]
        k: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Score a label raster against a reference, ignoring background.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        /// Write `<out>.csv` and `<out>.json` as well as printing JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// k-means with 10 seeds on raw spectra or LBAE codes.
    BaselineKmeans {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        latent: bool,
    },
    /// preprocess, train-lbae, train-rbm, segment and evaluate in one go.
    Run {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Serve the local annealing stub on `POST /sample`.
    ServeStub {
        #[arg(long, default_value = "127.0.0.1:8765")]
        addr: SocketAddr,
        #[arg(long, default_value_t = 1000)]
        sweeps: usize,
        #[arg(long, default_value_t = 0.1)]
        beta_start: f64,
        #[arg(long, default_value_t = 5.0)]
        beta_end: f64,
        #[arg(long, default_value_t = 4)]
        max_concurrent: usize,
        /// Delay before answering, in milliseconds.
        #[arg(long)]
        delay_ms: Option<u64>,
    },
    /// Write a synthetic scene, its ground truth and a config.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let (a, b) = s
        .split_once("..=")
        .or_else(|| s.split_once(".."))
        .ok_or_else(|| format!("expected LO..HI, got `{s}`"))?;
    let lo: usize = a.trim().parse().map_err(|_| format!("bad lower bound `{a}`"))?;
    let hi: usize = b.trim().parse().map_err(|_| format!("bad upper bound `{b}`"))?;
    if lo == 0 || lo > hi {
        return Err(format!("range {lo}..{hi} must be ascending and start above 0"));
    }
    Ok(lo..=hi)
}

fn load_config(args: &RunArgs) -> Result<PipelineConfig> {
    PipelineConfig::load(&args.config).with_context(|| format!("loading {}", args.config.display()))
}

/// The newest `runs/<unix>-<tag>` directory for this config.
fn latest_run(cfg: &PipelineConfig) -> Result<PathBuf> {
    let runs = cfg.resolve(Path::new("runs"));
    let suffix = format!("-{}", cfg.tag);
    let mut found: Vec<PathBuf> = fs::read_dir(&runs)
        .with_context(|| format!("no run directory under {}; run `preprocess` first", runs.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && p.file_name().is_some_and(|n| n.to_string_lossy().ends_with(&suffix)))
        .collect();
    found.sort();
    found.pop().with_context(|| format!("no `*{suffix}` run under {}", runs.display()))
}

fn open_run(args: &RunArgs, cfg: &PipelineConfig, fresh: bool) -> Result<RunDir> {
    let run = match (&args.run, &cfg.output_dir) {
        (Some(dir), _) => RunDir::open(dir)?,
        (None, Some(_)) => RunDir::for_config(cfg)?,
        (None, None) if fresh => RunDir::for_config(cfg)?,
        (None, None) => RunDir::open(latest_run(cfg)?)?,
    };
    log::info!("run directory {}", run.root().display());
    Ok(run)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Preprocess { run } => {
            let cfg = load_config(&run)?;
            let dir = open_run(&run, &cfg, true)?;
            let rec = preprocess(&cfg, &dir)?;
            println!(
                "{}: {} bands, {} classes, train/validation/test {}/{}/{}",
                dir.root().display(),
                rec.bands,
                rec.classes.len(),
                rec.train,
                rec.validation,
                rec.test
            );
        }
        Command::TrainLbae {
            run,
            epochs,
            batch,
            lr,
            optimizer,
        } => {
            let mut cfg = load_config(&run)?;
            let l = &mut cfg.lbae;
            l.epochs = epochs.unwrap_or(l.epochs);
            l.batch_size = batch.unwrap_or(l.batch_size);
            l.learning_rate = lr.unwrap_or(l.learning_rate);
            l.optimizer = optimizer.unwrap_or(l.optimizer);
            let dir = open_run(&run, &cfg, false)?;
            let rec = train_lbae_stage(&cfg, &dir)?;
            println!("{}: test euclidean {:.5}, sad {:.5}", rec.model, rec.test_euclidean, rec.test_sad);
        }
        Command::GridSearchLbae { run, epochs } => {
            let mut cfg = load_config(&run)?;
            cfg.lbae.epochs = epochs.unwrap_or(cfg.lbae.epochs);
            let dir = open_run(&run, &cfg, false)?;
            let rec = grid_search_lbae_stage(&cfg, &dir)?;
            print!("{}", fs::read_to_string(dir.root().join(&rec.table))?);
            println!("winner: batch {}, lr {:e}", rec.winner_batch, rec.winner_learning_rate);
        }
        Command::TrainRbm {
            run,
            sampler,
            hidden,
            scan,
            repeats,
            epochs,
            endpoint,
        } => {
            let mut cfg = load_config(&run)?;
            let t = &mut cfg.rbm.train;
            t.sampler = sampler.unwrap_or(t.sampler);
            t.epochs = epochs.unwrap_or(t.epochs);
            if endpoint.is_some() {
                t.remote_endpoint = endpoint;
            }
            if t.sampler == SamplerKind::Remote
                && t.remote_endpoint.is_none()
                && std::env::var(ANNEAL_ENDPOINT_VAR).map_or(true, |v| v.is_empty())
            {
                bail!("the remote sampler needs --endpoint, rbm.remote_endpoint or {ANNEAL_ENDPOINT_VAR}");
            }
            let repeats = repeats.unwrap_or(cfg.rbm.repeats);
            let plan = match (hidden, scan) {
                (_, Some(range)) => RbmPlan::Scan { hidden: range, repeats },
                (Some(h), None) => RbmPlan::Single(h),
                (None, None) => RbmPlan::Single(cfg.rbm.hidden),
            };
            let dir = open_run(&run, &cfg, false)?;
            match train_rbm_stage(&cfg, &dir, &plan)? {
                RbmStageResult::Single(r) => println!(
                    "{}: H={}, best epoch {}, threshold {:.1}, validation V {:.4}",
                    r.model, r.n_hidden, r.best_epoch, r.threshold, r.validation_v_measure
                ),
                RbmStageResult::Scan(s) => {
                    print!("{}", fs::read_to_string(dir.root().join(&s.wins))?);
                    println!("{} runs under {}, best H = {}", s.runs, s.runs_root, s.best_hidden);
                }
            }
        }
        Command::Segment {
            run,
            model,
            ahc,
            distance,
            k,
            threshold,
        } => {
            let cfg = load_config(&run)?;
            let dir = open_run(&run, &cfg, false)?;
            let opts = SegmentOptions {
                model,
                threshold,
                ahc: ahc.map(|linkage| AhcOptions {
                    linkage,
                    distance: distance.unwrap_or(cfg.ahc.distance),
                    k: k.unwrap_or(cfg.ahc.k),
                }),
            };
            let (_, rec) = segment_stage(&cfg, &dir, &opts)?;
            println!("{}: {} RBM labels, {} segments", rec.raster, rec.rbm_labels, rec.segments);
        }
        Command::Evaluate { pred, truth, out } => {
            let p = load_label_raster(&pred).with_context(|| format!("reading {}", pred.display()))?;
            let t = load_label_raster(&truth).with_context(|| format!("reading {}", truth.display()))?;
            let scores = evaluate_rasters(&p, &t)?;
            let json = scores_json(&scores)?;
            if let Some(out) = out {
                write_scores_csv(&out.with_extension("csv"), &scores)?;
                fs::write(out.with_extension("json"), &json)?;
            }
            println!("{json}");
        }
        Command::BaselineKmeans { run, latent } => {
            let cfg = load_config(&run)?;
            let dir = open_run(&run, &cfg, false)?;
            let (report, rec) = baseline_kmeans_stage(&cfg, &dir, latent)?;
            print!("{}", report.table());
            println!("per-seed scores in {}", rec.table);
        }
        Command::Run { run } => {
            let cfg = load_config(&run)?;
            let dir = open_run(&run, &cfg, true)?;
            let s = run_pipeline(&cfg, &dir)?;
            println!("segmentation: {}", scores_json(&s.segmentation)?);
            print!("raw k-means:\n{}", s.kmeans_raw.table());
        }
        Command::ServeStub {
            addr,
            sweeps,
            beta_start,
            beta_end,
            max_concurrent,
            delay_ms,
        } => {
            let schedule = AnnealSchedule {
                beta_start,
                beta_end,
                sweeps,
                ..AnnealSchedule::default()
            };
            schedule.validate()?;
            let config = StubConfig {
                schedule,
                max_concurrent,
                response_delay: delay_ms.map(Duration::from_millis),
            };
            serve_blocking(addr, config)?;
        }
        Command::Synth { out, seed } => {
            let mut sc = SynthConfig::default();
            sc.seed = seed.unwrap_or(sc.seed);
            let files = write_synthetic_scene(&out, &sc)?;
            println!("{}", files.config.display());
        }
    }
    Ok(())
}
