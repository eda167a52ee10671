//! Acceptance suite. Every criterion prints one `PASS`/`FAIL` line with
//! its measurements, then asserts. Timed criteria run one at a time so
//! that wall-clock limits are not shared between tests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use hsiseg::clustering::{ahc, DistanceMatrix, Linkage, Merge};
use hsiseg::lbae::{LatentMode, Lbae, LbaeArchitecture};
use hsiseg::metrics::{adjusted_rand, completeness, contingency, homogeneity, rand_score, v_measure};
use hsiseg::pipeline::{baseline_kmeans_stage, run_pipeline, write_synthetic_scene, PipelineConfig, RunDir, SynthConfig};
use hsiseg::rbm::{log_likelihood, train_rbm, NegativePhase, RbmModel, RbmTrainConfig, SamplerKind};
use hsiseg::samplers::{exact_boltzmann, gibbs_sample, rbm_to_qubo, sa_sample, AnnealSchedule, QuboProblem};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:>2}: {verdict}  {detail}");
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed < Duration::from_secs(limit_secs)
}

/// Bits of `index`, most significant first.
fn bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect()
}

/// `E(v, h) = −aᵀv − bᵀh − vᵀWh`, summed term by term.
fn rbm_energy(m: &RbmModel<f64>, v: &[u8], h: &[u8]) -> f64 {
    let mut e = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        e -= m.visible_bias[i] * f64::from(vi);
    }
    for (j, &hj) in h.iter().enumerate() {
        e -= m.hidden_bias[j] * f64::from(hj);
    }
    for (i, &vi) in v.iter().enumerate() {
        for (j, &hj) in h.iter().enumerate() {
            e -= m.weights[[i, j]] * f64::from(vi * hj);
        }
    }
    e
}

/// Parameters on a 1/1024 grid in [−4, 4]: every partial sum is exact in
/// f64, so energies computed in any order agree bit for bit.
fn dyadic_rbm(nv: usize, nh: usize, rng: &mut ChaCha8Rng) -> RbmModel<f64> {
    let mut draw = || f64::from(rng.random_range(-4096i32..=4096)) / 1024.0;
    let w = Array2::from_shape_simple_fn((nv, nh), &mut draw);
    let a = Array1::from_shape_simple_fn(nv, &mut draw);
    let b = Array1::from_shape_simple_fn(nh, &mut draw);
    RbmModel::from_parts(w, a, b).unwrap()
}

fn gaussian_rbm(nv: usize, nh: usize, sigma: f64, rng: &mut ChaCha8Rng) -> RbmModel<f64> {
    let normal = rand_distr::Normal::new(0.0, sigma).unwrap();
    let mut draw = || rand_distr::Distribution::sample(&normal, rng);
    let w = Array2::from_shape_simple_fn((nv, nh), &mut draw);
    let a = Array1::from_shape_simple_fn(nv, &mut draw);
    let b = Array1::from_shape_simple_fn(nh, &mut draw);
    RbmModel::from_parts(w, a, b).unwrap()
}

#[test]
fn criterion_01_rbm_qubo_bridge() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut mismatches = 0;
    let mut checked = 0;
    for k in 0..200 {
        let nv = rng.random_range(1..=4);
        let nh = rng.random_range(1..=4);
        let m = if k % 2 == 0 { dyadic_rbm(nv, nh, &mut rng) } else { gaussian_rbm(nv, nh, 1.0, &mut rng) };
        let q = rbm_to_qubo(&m);
        assert_eq!(q.n_vars(), nv + nh);
        for x in 0..1usize << (nv + nh) {
            let x = bits(x, nv + nh);
            let (v, h) = x.split_at(nv);
            let qubo = q.energy(&x).unwrap();
            let model = m.energy(v, h).unwrap();
            let oracle = rbm_energy(&m, v, h);
            let exact = if k % 2 == 0 {
                qubo == oracle && model == oracle
            } else {
                qubo == model && (qubo - oracle).abs() <= 1e-12 * oracle.abs().max(1.0)
            };
            mismatches += usize::from(!exact);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = mismatches == 0 && within(elapsed, 10);
    report(1, pass, &format!("{checked} assignments over 200 RBMs, {mismatches} mismatches, {elapsed:.2?} (limit 10 s)"));
    assert!(pass);
}

#[test]
fn criterion_02_gibbs_matches_boltzmann() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let m = gaussian_rbm(4, 3, 0.8, &mut rng);
    let exact = exact_boltzmann(&rbm_to_qubo(&m), 1.0).unwrap();
    let start = Instant::now();
    let samples = gibbs_sample(&m, 10_000, 100_000, 7).unwrap();
    let elapsed = start.elapsed();

    let empirical = samples.empirical_distribution(7);
    let joint_tv = exact.total_variation(&empirical);
    let mut exact_v = [0.0; 16];
    let mut sampled_v = [0.0; 16];
    // bit i of the state index is x_i, and the visible units come first
    for (x, (&p, &q)) in exact.probabilities().iter().zip(&empirical).enumerate() {
        exact_v[x & 0b1111] += p;
        sampled_v[x & 0b1111] += q;
    }
    let visible_tv = 0.5 * exact_v.iter().zip(&sampled_v).map(|(p, q)| (p - q).abs()).sum::<f64>();
    let pass = joint_tv < 0.02 && visible_tv < 0.02 && within(elapsed, 60);
    report(
        2,
        pass,
        &format!("TV joint {joint_tv:.4}, visible {visible_tv:.4} (limit 0.02), {elapsed:.2?} (limit 60 s)"),
    );
    assert!(pass);
}

fn random_qubo(n: usize, rng: &mut ChaCha8Rng) -> QuboProblem<f64> {
    let linear = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut quad = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            quad.push(((i, j), rng.random_range(-1.0..1.0)));
        }
    }
    QuboProblem::new(linear, quad, 0.0).unwrap()
}

fn brute_force_minimum(q: &QuboProblem<f64>) -> f64 {
    let n = q.n_vars();
    (0..1usize << n)
        .map(|k| {
            let x = bits(k, n);
            let mut e = q.offset();
            for (i, &l) in q.linear().iter().enumerate() {
                e += l * f64::from(x[i]);
            }
            for (&(i, j), &w) in q.quadratic() {
                e += w * f64::from(x[i] * x[j]);
            }
            e
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn criterion_03_annealing_finds_ground_states() {
    let _g = serial();
    const TRIALS: u64 = 5;
    let schedule = AnnealSchedule {
        sweeps: 1000,
        ..AnnealSchedule::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let start = Instant::now();
    let mut hits = 0;
    let mut pairs = 0;
    for p in 0..20u64 {
        let q = random_qubo(8, &mut rng);
        let min = brute_force_minimum(&q);
        for t in 0..TRIALS {
            let set = sa_sample(&q, &schedule, 100, p * 1000 + t).unwrap();
            let (_, best) = set.lowest().unwrap();
            hits += usize::from((best - min).abs() <= 1e-9);
            pairs += 1;
        }
    }
    let elapsed = start.elapsed();
    let rate = hits as f64 / pairs as f64;
    let pass = rate >= 0.95 && within(elapsed, 60);
    report(
        3,
        pass,
        &format!("{hits}/{pairs} (problem, trial) pairs optimal = {:.1}% (limit 95%), {elapsed:.2?} (limit 60 s)", 100.0 * rate),
    );
    assert!(pass);
}

#[test]
fn criterion_04_exact_gradient_training() {
    let _g = serial();
    // Eight 4-bit patterns: both halves of a bar, with a noisy bit.
    let patterns: [[u8; 4]; 8] = [
        [1, 1, 0, 0],
        [1, 1, 0, 0],
        [1, 1, 0, 0],
        [0, 0, 1, 1],
        [0, 0, 1, 1],
        [0, 0, 1, 1],
        [1, 1, 1, 0],
        [0, 1, 1, 1],
    ];
    let data = Array2::from_shape_fn((8, 4), |(r, c)| f64::from(patterns[r][c]));
    let cfg = RbmTrainConfig {
        learning_rate: 0.01,
        epochs: 1,
        batch_size: 8,
        sampler: SamplerKind::Exact,
        seed: 404,
        init_sigma: 0.01,
        ..RbmTrainConfig::default()
    };
    let start = Instant::now();
    let mut model: RbmModel<f64> = cfg.initial_model(4, 3);
    let initial = log_likelihood(&model, data.view()).unwrap();
    let mut ll = vec![initial];
    for _ in 0..200 {
        model = train_rbm(model, data.view(), None, &cfg, &NegativePhase::Exact, None).unwrap().model;
        ll.push(log_likelihood(&model, data.view()).unwrap());
    }
    let elapsed = start.elapsed();
    // `log_likelihood` is the per-sample mean; the training-set
    // log-likelihood is its sum over the eight patterns.
    let per_sample = ll[200] - initial;
    let total = 8.0 * per_sample;
    let drops = ll.windows(2).filter(|w| w[1] < w[0]).count();
    let pass = total >= 0.1 && drops * 20 <= 200 && within(elapsed, 30);
    report(
        4,
        pass,
        &format!(
            "training-set log-likelihood {:.4} -> {:.4} (gain {total:.4} nats, {per_sample:.4} per sample; limit 0.1), \
             {drops}/200 decreasing epochs (limit 10), {elapsed:.2?} (limit 30 s)",
            8.0 * initial,
            8.0 * ll[200]
        ),
    );
    assert!(pass);
}

/// Pair counts by enumerating every pair: (same in both, same class,
/// same cluster, total).
fn pair_enumeration(truth: &[u8], pred: &[u8]) -> (i128, i128, i128, i128) {
    let (mut both, mut sa, mut sb, mut total) = (0, 0, 0, 0);
    for i in 0..truth.len() {
        for j in i + 1..truth.len() {
            let a = truth[i] == truth[j];
            let b = pred[i] == pred[j];
            both += i128::from(a && b);
            sa += i128::from(a);
            sb += i128::from(b);
            total += 1;
        }
    }
    (both, sa, sb, total)
}

fn entropy(labels: &[u8]) -> f64 {
    let mut counts = BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    let n = labels.len() as f64;
    counts.values().map(|&c| -(c as f64 / n) * (c as f64 / n).ln()).sum()
}

/// `H(A|B)` from explicit joint counts.
fn conditional_entropy(a: &[u8], b: &[u8]) -> f64 {
    let mut joint = BTreeMap::new();
    let mut marginal = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0usize) += 1;
        *marginal.entry(y).or_insert(0usize) += 1;
    }
    let n = a.len() as f64;
    joint
        .iter()
        .map(|(&(_, y), &c)| -(c as f64 / n) * (c as f64 / marginal[&y] as f64).ln())
        .sum()
}

#[test]
fn criterion_05_metric_oracle() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let (mut rs_bad, mut ars_bad, mut dual_bad, mut h_err, mut v_err) = (0, 0, 0, 0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = rng.random_range(2..=12);
        let ka = rng.random_range(1..=5);
        let kb = rng.random_range(1..=5);
        let truth: Vec<u8> = (0..n).map(|_| rng.random_range(0..ka)).collect();
        let pred: Vec<u8> = (0..n).map(|_| rng.random_range(0..kb)).collect();
        let table = contingency(&truth, &pred).unwrap();

        let (both, sa, sb, total) = pair_enumeration(&truth, &pred);
        let rs_oracle = (total + 2 * both - sa - sb) as f64 / total as f64;
        let den = total * (sa + sb) - 2 * sa * sb;
        let ars_oracle = if den == 0 { 0.0 } else { (2 * (both * total - sa * sb)) as f64 / den as f64 };
        rs_bad += usize::from(rand_score::<f64>(&table).unwrap() != rs_oracle);
        ars_bad += usize::from(adjusted_rand::<f64>(&table).unwrap() != ars_oracle);

        let h: f64 = homogeneity(&table);
        let c: f64 = completeness(&table);
        let swapped = contingency(&pred, &truth).unwrap();
        dual_bad += usize::from(homogeneity::<f64>(&swapped) != c || completeness::<f64>(&swapped) != h);

        let hc = entropy(&truth);
        let h_oracle = if hc == 0.0 { 1.0 } else { 1.0 - conditional_entropy(&truth, &pred) / hc };
        h_err = h_err.max((h - h_oracle.clamp(0.0, 1.0)).abs());

        let x: f64 = rng.random_range(0.0..=1.0);
        let beta: f64 = rng.random_range(0.0..=1.0);
        v_err = v_err.max((v_measure(x, x, beta).unwrap() - x).abs());
    }
    let pass = rs_bad == 0 && ars_bad == 0 && dual_bad == 0 && v_err <= 1e-12 && h_err <= 1e-12;
    report(
        5,
        pass,
        &format!(
            "500 labelings: RS mismatches {rs_bad}, ARS mismatches {ars_bad}, h/c duality breaks {dual_bad} (all exact), \
             max |V(x,x,b) - x| {v_err:.1e} (limit 1e-12), max homogeneity error vs entropy oracle {h_err:.1e} (limit 1e-12)"
        ),
    );
    assert!(pass);
}

/// Recomputes every inter-cluster distance from the point distances at
/// every step; ties go to the smallest `(a, b)` id pair.
fn naive_ahc(d: &[Vec<f64>], linkage: Linkage, k: usize) -> Vec<Merge<f64>> {
    let n = d.len();
    let mut clusters: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::new();
    while clusters.len() > k {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let (ia, ma) = &clusters[x];
                let (ib, mb) = &clusters[y];
                let dist = match linkage {
                    Linkage::Complete => ma.iter().flat_map(|&p| mb.iter().map(move |&q| d[p][q])).fold(f64::MIN, f64::max),
                    Linkage::Average => {
                        let sum: f64 = ma.iter().flat_map(|&p| mb.iter().map(move |&q| d[p][q])).sum();
                        sum / (ma.len() * mb.len()) as f64
                    }
                };
                let (lo, hi) = ((*ia).min(*ib), (*ia).max(*ib));
                let better = match best {
                    None => true,
                    Some((bd, blo, bhi, _, _)) => dist < bd || (dist == bd && (lo, hi) < (blo, bhi)),
                };
                if better {
                    best = Some((dist, lo, hi, x, y));
                }
            }
        }
        let (dist, lo, hi, x, y) = best.unwrap();
        let new_id = n + merges.len();
        merges.push(Merge { a: lo, b: hi, distance: dist, new_id });
        let (_, gone) = clusters.remove(y);
        clusters[x].0 = new_id;
        clusters[x].1.extend(gone);
    }
    merges
}

#[test]
fn criterion_06_ahc_oracle() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut mismatched = 0;
    let mut ties = 0;
    let mut worst_rel = 0.0f64;
    for m in 0..100 {
        let n = 20;
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                // Even matrices use a handful of integer distances, so many
                // merges are decided by the tie rule.
                let v = if m % 2 == 0 { f64::from(rng.random_range(1..=4)) } else { rng.random_range(0.0..1.0) };
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        let dm = DistanceMatrix::from_fn(n, |i, j| d[i][j]).unwrap();
        for linkage in [Linkage::Complete, Linkage::Average] {
            let expected = naive_ahc(&d, linkage, 1);
            let (_, dendrogram) = ahc(&dm, linkage, 1).unwrap();
            let same_steps = dendrogram.merges.len() == expected.len()
                && dendrogram.merges.iter().zip(&expected).all(|(x, y)| (x.a, x.b, x.new_id) == (y.a, y.b, y.new_id));
            // Integer matrices sum exactly; elsewhere the running average
            // linkage sum and the recomputed one add in different orders.
            let close = dendrogram.merges.iter().zip(&expected).all(|(x, y)| {
                if m % 2 == 0 {
                    x.distance == y.distance
                } else {
                    let err = (x.distance - y.distance).abs() / y.distance.abs().max(1e-300);
                    worst_rel = worst_rel.max(err);
                    err <= 1e-12
                }
            });
            mismatched += usize::from(!(same_steps && close));
            ties += expected.windows(2).filter(|w| w[0].distance == w[1].distance).count();
        }
    }
    let pass = mismatched == 0;
    report(
        6,
        pass,
        &format!("200 merge sequences (100 matrices x 2 linkages), {mismatched} differ from the reference \
             (merge pairs and ids exact; distances exact on integer matrices, max relative gap {worst_rel:.1e} elsewhere, limit 1e-12), \
             {ties} consecutive equal-distance merges"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_lbae_gradient_and_latent_length() {
    let _g = serial();
    let arch = LbaeArchitecture::with_widths(16, 2, 3, 2);
    let m = Lbae::<f64>::new(arch, 7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let batch = Array2::from_shape_simple_fn((3, 16), || rng.random_range(0.0..1.0));
    let (_, grad) = m.loss_and_gradient(batch.view(), LatentMode::Relaxed).unwrap();
    let p = m.parameters();
    let step = 1e-6;
    let mut probe = m.clone();
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let mut q = p.clone();
        q[i] = p[i] + step;
        probe.set_parameters(&q).unwrap();
        let up = probe.loss_and_gradient(batch.view(), LatentMode::Relaxed).unwrap().0;
        q[i] = p[i] - step;
        probe.set_parameters(&q).unwrap();
        let down = probe.loss_and_gradient(batch.view(), LatentMode::Relaxed).unwrap().0;
        let fd = (up - down) / (2.0 * step);
        worst = worst.max((fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-8));
    }

    let mut wrong_len = 0;
    for seed in 0..20u64 {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let widths = [r.random_range(1..=32), r.random_range(1..=32), r.random_range(1..=32)];
        let arch = LbaeArchitecture::with_widths(112, widths[0], widths[1], widths[2]);
        let model = Lbae::<f64>::new(arch.clone(), seed).unwrap();
        let pixel: Vec<f64> = (0..112).map(|_| r.random_range(0.0..1.0)).collect();
        let ok = arch.latent_len().unwrap() == 28 && model.latent_len() == 28 && model.encode(&pixel).unwrap().len() == 28;
        wrong_len += usize::from(!ok);
    }
    let pass = worst < 1e-4 && wrong_len == 0;
    report(
        7,
        pass,
        &format!("{} parameters, max relative gradient error {worst:.2e} (limit 1e-4); 20 architectures on 112 bands, {wrong_len} with latent length != 28", p.len()),
    );
    assert!(pass);
}

struct PipelineRun {
    ars: f64,
    kmeans_ars: f64,
    elapsed: Duration,
}

fn synthetic_pipeline(dir: &Path) -> PipelineRun {
    let files = write_synthetic_scene(dir, &SynthConfig::default()).unwrap();
    let cfg = PipelineConfig::load(&files.config).unwrap();
    let run = RunDir::for_config(&cfg).unwrap();
    let start = Instant::now();
    let summary = run_pipeline(&cfg, &run).unwrap();
    PipelineRun {
        ars: summary.segmentation.adjusted_rand,
        kmeans_ars: summary.kmeans_raw.mean[2],
        elapsed: start.elapsed(),
    }
}

/// Every file under `root`, keyed by relative path.
fn files_under(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(root).unwrap() {
        let path = entry.unwrap().path();
        out.insert(path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap());
    }
    out
}

/// Criteria 8 and 9 share the two pipeline executions. The second one runs
/// on a four-thread pool, so the comparison also covers thread scheduling.
#[test]
fn criteria_08_09_synthetic_pipeline_and_determinism() {
    let _g = serial();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = synthetic_pipeline(a.path());
    let pass8 = first.ars >= 0.6 && first.ars > first.kmeans_ars && within(first.elapsed, 600);
    report(
        8,
        pass8,
        &format!(
            "pipeline ARS {:.4} (limit 0.6), raw k-means mean ARS {:.4}, {:.2?} (limit 600 s)",
            first.ars, first.kmeans_ars, first.elapsed
        ),
    );

    let pool = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let second = pool.install(|| synthetic_pipeline(b.path()));
    let (ra, rb) = (a.path().join("run"), b.path().join("run"));
    let raster_same = fs::read(ra.join("maps/segmentation.segm")).unwrap() == fs::read(rb.join("maps/segmentation.segm")).unwrap();
    let metrics_a = files_under(&ra.join("metrics"));
    let metrics_b = files_under(&rb.join("metrics"));
    let csvs: Vec<&String> = metrics_a.keys().filter(|k| k.ends_with(".csv")).collect();
    let differing: Vec<&&String> = csvs.iter().filter(|k| metrics_b.get(**k) != metrics_a.get(**k)).collect();
    let pass9 = raster_same && differing.is_empty() && metrics_a.len() == metrics_b.len() && first.ars == second.ars;
    report(
        9,
        pass9,
        &format!(
            "raster identical: {raster_same}; {} metric CSVs compared, differing: {differing:?}",
            csvs.len()
        ),
    );
    assert!(pass8 && pass9);
}

/// Reads the pipeline config named by `HYPERBLOOD_CONFIG`. Failures are
/// reported but do not fail the suite.
#[test]
fn criterion_10_hyperblood_reproduction() {
    let _g = serial();
    let Some(path) = std::env::var_os("HYPERBLOOD_CONFIG") else {
        println!("criterion 10: SKIP  HYPERBLOOD_CONFIG is not set");
        return;
    };
    let outcome = (|| -> Result<(f64, f64), Box<dyn std::error::Error>> {
        let mut cfg = PipelineConfig::load(Path::new(&path))?;
        cfg.rbm.hidden = 23;
        cfg.rbm.train.sampler = SamplerKind::Cd1;
        let run = RunDir::for_config(&cfg)?;
        let summary = run_pipeline(&cfg, &run)?;
        let (kmeans, _) = baseline_kmeans_stage(&cfg, &run, false)?;
        Ok((kmeans.mean[0], summary.segmentation.homogeneity))
    })();
    match outcome {
        Ok((kmeans_h, rbm_h)) => {
            let kmeans_ok = (kmeans_h - 0.509).abs() <= 0.10;
            let rbm_ok = (rbm_h - 0.492).abs() <= 0.15;
            report(
                10,
                kmeans_ok && rbm_ok,
                &format!("k-means raw homogeneity {kmeans_h:.3} (0.509 +/- 0.10), CD-1 H=23 homogeneity {rbm_h:.3} (0.492 +/- 0.15); non-gating"),
            );
        }
        Err(e) => report(10, false, &format!("could not run: {e}; non-gating")),
    }
}
