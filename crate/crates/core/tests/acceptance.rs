//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use featgraph::dataset::{load_iris, Dataset, MixtureMode};
use featgraph::eval::{kuncheva, mixture_recovery, roc_auc, MixtureSource, RecoveryConfig};
use featgraph::graph::{build_ecfs, build_infs_unsup};
use featgraph::ranking::{
    ec_scores, geometric_series_scores, infs_scores, resolvent, truncated_geometric, Method, MethodRanker,
    RankParams, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use featgraph::stats::{spearman, student_t_two_sided};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, symmetric: bool, floor: f64) -> Array2<f64> {
    let mut a = Array2::from_shape_fn((n, n), |_| floor + (1.0 - floor) * rng.random::<f64>());
    if symmetric {
        for i in 0..n {
            for j in 0..i {
                a[[i, j]] = a[[j, i]];
            }
        }
    }
    a
}

/// 1. Inf-FS scores equal the truncated path sum.
fn geometric_series_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=20);
        let a = random_matrix(&mut rng, n, true, 0.0);
        let out = infs_scores(a.view(), 0.9).expect("solve");
        let brute = truncated_geometric(a.view(), out.r, 300);
        for (s, b) in out.scores.iter().zip(&brute) {
            worst = worst.max((s - b).abs() / b.abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-8 && elapsed < Duration::from_secs(1),
        format!("max relative error {worst:.2e}, {elapsed:.2?}"),
    )
}

/// 2. Normalized A^200 e matches the power-iteration eigenvector.
fn eigenvector_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(2..=20);
        let a = random_matrix(&mut rng, n, false, 0.01);
        let v = ec_scores(a.view(), DEFAULT_TOL, DEFAULT_MAX_ITER).expect("converges");
        let mut x = Array1::<f64>::ones(n);
        for _ in 0..200 {
            x = a.dot(&x);
            x /= x.sum();
        }
        for (p, q) in v.iter().zip(x.iter()) {
            worst = worst.max((p - q).abs());
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-6 && elapsed < Duration::from_secs(1),
        format!("max |diff| {worst:.2e}, {elapsed:.2?}"),
    )
}

/// 3. Fundamental matrix of an absorbing chain versus simulated visits.
fn fundamental_matrix_monte_carlo() -> Outcome {
    let transient = ndarray::array![
        [0.20, 0.30, 0.10, 0.20],
        [0.10, 0.30, 0.20, 0.20],
        [0.30, 0.10, 0.20, 0.10],
        [0.20, 0.20, 0.20, 0.20]
    ];
    let start = Instant::now();
    let fundamental = resolvent(transient.view(), 1.0).expect("invertible");
    let (series, _) = geometric_series_scores(transient.view(), 1.0).expect("solve");

    let walks_per_state = 250_000;
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut visits = Array2::<f64>::zeros((4, 4));
    for from in 0..4 {
        for _ in 0..walks_per_state {
            let mut state = from;
            loop {
                visits[[from, state]] += 1.0;
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut next = None;
                for (j, &p) in transient.row(state).iter().enumerate() {
                    acc += p;
                    if u < acc {
                        next = Some(j);
                        break;
                    }
                }
                match next {
                    Some(j) => state = j,
                    None => break,
                }
            }
        }
    }
    visits /= walks_per_state as f64;

    let worst = fundamental
        .iter()
        .zip(visits.iter())
        .map(|(n, v)| (n - v).abs() / n)
        .fold(0.0, f64::max);
    // row sums of N are the Inf-FS scores plus one
    let consistent = (0..4).all(|i| (fundamental.row(i).sum() - series[i] - 1.0).abs() < 1e-10);
    let elapsed = start.elapsed();
    outcome(
        worst <= 0.02 && consistent && elapsed < Duration::from_secs(30),
        format!("max relative deviation {:.3}%, row sums consistent {consistent}, {elapsed:.2?}", 100.0 * worst),
    )
}

/// 4. Iris base features outrank their convex mixtures.
fn iris_mixture_recovery() -> Outcome {
    let start = Instant::now();
    let ranker = MethodRanker::new(
        Method::InfsUnsup,
        RankParams {
            alpha: 0.2,
            ..RankParams::default()
        },
    );
    let source = MixtureSource::Base(load_iris());
    let linear = mixture_recovery(&ranker, &RecoveryConfig::new(source.clone(), MixtureMode::Linear, 20, 0))
        .expect("linear run");
    let periodic = mixture_recovery(&ranker, &RecoveryConfig::new(source, MixtureMode::Periodic, 20, 0))
        .expect("periodic run");
    let elapsed = start.elapsed();
    let medians_ok = linear.per_base_median_rank.iter().all(|&m| m <= 10.0);
    outcome(
        linear.trials_base_better >= 18
            && medians_ok
            && periodic.trials_base_better < linear.trials_base_better
            && elapsed < Duration::from_secs(10),
        format!(
            "linear {}/20 (medians {:?}), periodic {}/20, {elapsed:.2?}",
            linear.trials_base_better, linear.per_base_median_rank, periodic.trials_base_better
        ),
    )
}

/// 5. End-to-end timing on 10,000 x 1,000.
fn throughput() -> Outcome {
    let (samples, features) = (10_000, 1_000);
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    // a few latent factors give the features some shared structure
    let latent = Array2::from_shape_fn((samples, 8), |_| rng.sample::<f64, _>(StandardNormal));
    let loadings = Array2::from_shape_fn((8, features), |_| rng.random::<f64>());
    let noise = Array2::from_shape_fn((samples, features), |_| rng.sample::<f64, _>(StandardNormal));
    let values = latent.dot(&loadings) + noise;
    let labels: Vec<i64> = latent.column(0).iter().map(|&v| i64::from(v > 0.0)).collect();
    let data = Dataset::new(values, Some(labels), None).expect("valid");

    let start = Instant::now();
    let a = build_infs_unsup(&data, 0.2).expect("graph");
    let scores = infs_scores(a.entries().view(), 0.9).expect("scores");
    let infs_time = start.elapsed();
    assert_eq!(scores.scores.len(), features);

    let start = Instant::now();
    let a = build_ecfs(&data, 0.2, 16).expect("graph");
    let v = ec_scores(a.entries().view(), DEFAULT_TOL, DEFAULT_MAX_ITER).expect("scores");
    let ecfs_time = start.elapsed();
    assert_eq!(v.len(), features);

    outcome(
        infs_time <= Duration::from_secs(30) && ecfs_time <= Duration::from_secs(10),
        format!("infs_unsup {infs_time:.2?} (budget 30s), ecfs {ecfs_time:.2?} (budget 10s)"),
    )
}

fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// 6. Kuncheva and AUC against brute-force oracles.
fn metric_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst_k = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(3..60);
        let k = rng.random_range(1..n);
        let a = rand::seq::index::sample(&mut rng, n, k).into_vec();
        let b = rand::seq::index::sample(&mut rng, n, k).into_vec();
        let overlap = a.iter().filter(|x| b.contains(x)).count() as f64;
        let (nf, kf) = (n as f64, k as f64);
        let expected = (overlap * nf - kf * kf) / (kf * (nf - kf));
        worst_k = worst_k.max((kuncheva(&a, &b, n).unwrap() - expected).abs());
    }
    let mut worst_auc = 0.0f64;
    let mut checked = 0;
    while checked < 500 {
        let len = rng.random_range(2..80);
        // coarse scores force plenty of ties
        let scores: Vec<f64> = (0..len).map(|_| f64::from(rng.random_range(0..10))).collect();
        let labels: Vec<bool> = (0..len).map(|_| rng.random_bool(0.4)).collect();
        if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
            continue;
        }
        worst_auc = worst_auc.max((roc_auc(&scores, &labels).unwrap() - brute_auc(&scores, &labels)).abs());
        checked += 1;
    }
    outcome(
        worst_k <= 1e-12 && worst_auc <= 1e-12,
        format!("kuncheva max err {worst_k:.1e}, auc max err {worst_auc:.1e}"),
    )
}

fn brute_ranks(x: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|&v| {
            let below = x.iter().filter(|&&w| w < v).count() as f64;
            let equal = x.iter().filter(|&&w| w == v).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

fn brute_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

/// Two-sided tail of Student's t (df = 10) by Simpson quadrature of the
/// density after the substitution t = t0 / s.
fn t_tail_quadrature(t0: f64) -> f64 {
    let df = 10.0f64;
    // Gamma(5.5) = 945/32 sqrt(pi), Gamma(5) = 24
    let norm = (945.0 / 32.0) * std::f64::consts::PI.sqrt() / ((df * std::f64::consts::PI).sqrt() * 24.0);
    let density = |t: f64| norm * (1.0 + t * t / df).powf(-(df + 1.0) / 2.0);
    let integrand = |s: f64| if s == 0.0 { 0.0 } else { density(t0 / s) * t0 / (s * s) };
    let steps = 20_000;
    let h = 1.0 / steps as f64;
    let mut sum = integrand(0.0) + integrand(1.0);
    for i in 1..steps {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * integrand(i as f64 * h);
    }
    2.0 * sum * h / 3.0
}

/// 7. Spearman and the t-test p-value against independent oracles.
fn statistical_kernels() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst = 0.0f64;
    for case in 0..200 {
        let len = rng.random_range(2..60);
        let tied = case % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| {
            if tied {
                f64::from(rng.random_range(0..5))
            } else {
                rng.random::<f64>()
            }
        };
        let x: Vec<f64> = (0..len).map(|_| draw(&mut rng)).collect();
        let y: Vec<f64> = (0..len).map(|_| draw(&mut rng)).collect();
        let expected = brute_pearson(&brute_ranks(&x), &brute_ranks(&y));
        worst = worst.max((spearman(&x, &y).unwrap() - expected).abs());
    }
    let oracle = t_tail_quadrature(2.228);
    let p = student_t_two_sided(2.228, 10.0);
    outcome(
        worst <= 1e-12 && (p - 0.050).abs() <= 1e-3 && (oracle - 0.050).abs() <= 1e-3,
        format!("spearman max err {worst:.1e}; p = {p:.6}, quadrature oracle {oracle:.6}"),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_featgraph"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn read(path: &Path) -> Vec<u8> {
    std::fs::read(path).unwrap_or_default()
}

/// 8. Every CLI command is byte-reproducible.
fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().expect("tempdir");
    let d = dir.path();
    let input = d.join("input.csv");
    if !run_cli(&["synth", "--seed", "5", "--output", input.to_str().unwrap()]) {
        return outcome(false, "could not create input dataset");
    }
    let input = input.to_str().unwrap().to_string();
    type Spec<'a> = (&'a str, Vec<String>, Vec<&'a str>);
    let commands: Vec<Spec> = vec![
        ("rank", vec!["rank".into(), "--input".into(), input.clone(), "--label-col".into(), "label".into(), "--method".into(), "ecfs".into()], vec![".json"]),
        ("eval", vec!["eval".into(), "--input".into(), input.clone(), "--label-col".into(), "label".into(), "--cardinalities".into(), "1,2,4,8".into(), "--trials".into(), "3".into(), "--seed".into(), "9".into()], vec![".json", ".csv"]),
        ("stability", vec!["stability".into(), "--input".into(), input.clone(), "--label-col".into(), "label".into(), "--top".into(), "4".into(), "--trials".into(), "4".into(), "--seed".into(), "9".into()], vec![".json"]),
        ("synth", vec!["synth".into(), "--mode".into(), "periodic".into(), "--seed".into(), "9".into()], vec![".csv", ".manifest.json"]),
        ("demo-iris", vec!["demo-iris".into(), "--trials".into(), "3".into(), "--seed".into(), "9".into()], vec![".json"]),
    ];
    let mut failures = Vec::new();
    for (name, args, suffixes) in &commands {
        let ext = if *name == "synth" { "csv" } else { "json" };
        let mut outputs = Vec::new();
        for run in 0..3 {
            let out = d.join(format!("{name}_{run}.{ext}"));
            let mut full = args.clone();
            full.push("--output".into());
            full.push(out.to_str().unwrap().into());
            if run == 2 {
                full.push("--jobs".into());
                full.push("2".into());
            }
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            if !run_cli(&refs) {
                failures.push(format!("{name} run {run} failed"));
            }
            let bytes: Vec<Vec<u8>> = suffixes
                .iter()
                .map(|s| read(&d.join(format!("{name}_{run}{s}"))))
                .collect();
            outputs.push(bytes);
        }
        if outputs.iter().any(|o| o.iter().any(Vec::is_empty)) || outputs[0] != outputs[1] || outputs[1] != outputs[2] {
            failures.push(format!("{name} outputs differ"));
        }
    }
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "5 commands x 3 runs byte-identical".to_string()
        } else {
            failures.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("AC-1 geometric-series equivalence", geometric_series_equivalence),
        ("AC-2 eigenvector-centrality limit", eigenvector_limit),
        ("AC-3 fundamental-matrix Monte Carlo", fundamental_matrix_monte_carlo),
        ("AC-4 Iris mixture recovery", iris_mixture_recovery),
        ("AC-5 throughput", throughput),
        ("AC-6 metric exactness", metric_exactness),
        ("AC-7 statistical kernels", statistical_kernels),
        ("AC-8 CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = check();
        println!("{} {name}: {}", if result.pass { "PASS" } else { "FAIL" }, result.detail);
        if !result.pass {
            failed += 1;
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
