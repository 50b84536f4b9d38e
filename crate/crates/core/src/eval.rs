//! Ranking quality: subset stability, held-out AUC versus the number of
//! selected features, and recovery of known base features in synthetic
//! mixtures.
//!
//! Trial `t` of any experiment seeded with `seed` uses `seed + t`, so
//! trials are independent of each other and of execution order. They run
//! on the ambient rayon pool and are gathered in trial order.

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{train_linear, LogisticConfig};
use crate::dataset::{self, Dataset, MixtureMode};
use crate::error::{Error, Result};
use crate::ranking::Ranker;
use crate::stats;

/// Kuncheva consistency of two equal-size feature subsets drawn from `n`
/// features: `(r n - k^2) / (k (n - k))` with `r` the overlap.
pub fn kuncheva(s1: &[usize], s2: &[usize], n: usize) -> Result<f64> {
    let k = s1.len();
    if s2.len() != k {
        return Err(Error::LengthMismatch {
            left: k,
            right: s2.len(),
        });
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "subset size must lie in (0, {n}), got {k}"
        )));
    }
    let a: HashSet<usize> = s1.iter().copied().collect();
    let b: HashSet<usize> = s2.iter().copied().collect();
    if a.len() != k || b.len() != k {
        return Err(Error::InvalidArgument("subsets contain repeated indices".into()));
    }
    if let Some(&bad) = a.iter().chain(&b).find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!("index {bad} out of range for {n} features")));
    }
    let r = a.intersection(&b).count() as f64;
    let (n, k) = (n as f64, k as f64);
    Ok((r * n - k * k) / (k * (n - k)))
}

/// Area under the ROC curve in its Mann-Whitney form: the fraction of
/// positive/negative pairs ordered correctly, ties counting one half.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClass(1));
    }
    if let Some(index) = scores.iter().position(|s| s.is_nan()) {
        return Err(Error::NonFiniteScore { index });
    }
    let ranks = stats::average_ranks(scores);
    let rank_sum: f64 = ranks.iter().zip(labels).filter(|(_, &l)| l).map(|(r, _)| r).sum();
    let p = positives as f64;
    let u = rank_sum - p * (p + 1.0) / 2.0;
    Ok(u / (p * negatives as f64))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = if values.len() > 1 {
        stats::std_dev(values).unwrap_or(0.0)
    } else {
        0.0
    };
    (mean, std)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 0 {
        0.5 * (values[mid - 1] + values[mid])
    } else {
        values[mid]
    }
}

/// Held-out AUC of a logistic model fitted on `train`. More than two
/// classes are scored one-vs-rest and macro-averaged.
pub fn holdout_auc(train: &Dataset, test: &Dataset, features: &[usize], config: &LogisticConfig) -> Result<f64> {
    let train_labels = train.supervised_labels()?;
    let test_labels = test.labels().ok_or(Error::MissingLabels)?;
    let classes = train.classes();
    let positives: Vec<i64> = if classes.len() == 2 { vec![classes[1]] } else { classes };
    let train_x = train.select_features(features);
    let test_x = test.select_features(features);
    let mut total = 0.0;
    for &c in &positives {
        let y: Vec<bool> = train_labels.iter().map(|&l| l == c).collect();
        let model = train_linear(train_x.view(), &y, config)?;
        let truth: Vec<bool> = test_labels.iter().map(|&l| l == c).collect();
        total += roc_auc(&model.decision(test_x.view()), &truth)?;
    }
    Ok(total / positives.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub cardinalities: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub train_fraction: f64,
    pub classifier: LogisticConfig,
}

impl EvalConfig {
    pub fn new(cardinalities: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            cardinalities,
            trials,
            seed,
            train_fraction: 2.0 / 3.0,
            classifier: LogisticConfig {
                seed,
                ..LogisticConfig::default()
            },
        }
    }
}

/// Everything one evaluation trial saw and produced.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    /// Feature order computed on the train rows only.
    pub order: Vec<usize>,
    /// One AUC per configured cardinality.
    pub aucs: Vec<f64>,
}

/// Per-cardinality AUC averaged over trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema: String,
    pub method: String,
    pub seed: u64,
    pub trial_count: usize,
    pub cardinalities: Vec<usize>,
    pub auc_mean: Vec<f64>,
    pub auc_std: Vec<f64>,
}

impl EvalReport {
    /// `cardinality,auc_mean,auc_std` table with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cardinality,auc_mean,auc_std\n");
        for i in 0..self.cardinalities.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.cardinalities[i], self.auc_mean[i], self.auc_std[i]
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

fn check_cardinalities(d: &Dataset, cardinalities: &[usize]) -> Result<()> {
    let n = d.n_features();
    if let Some(&m) = cardinalities.iter().find(|&&m| m > n) {
        return Err(Error::CardinalityTooLarge {
            requested: m,
            available: n,
        });
    }
    if cardinalities.contains(&0) {
        return Err(Error::InvalidArgument("cardinalities must be positive".into()));
    }
    Ok(())
}

/// Runs trial `trial`: stratified split with `seed + trial`, ranking on the
/// train rows, then one classifier per cardinality on the top features.
pub fn eval_trial(d: &Dataset, ranker: &dyn Ranker, config: &EvalConfig, trial: usize) -> Result<TrialOutcome> {
    check_cardinalities(d, &config.cardinalities)?;
    let labels = d.supervised_labels()?;
    let seed = config.seed.wrapping_add(trial as u64);
    let (train_rows, test_rows) = dataset::stratified_indices(labels, config.train_fraction, seed)?;
    let train = d.select_rows(&train_rows)?;
    let test = d.select_rows(&test_rows)?;
    let ranking = ranker.rank(&train, seed)?;
    let aucs = config
        .cardinalities
        .iter()
        .map(|&m| holdout_auc(&train, &test, ranking.top(m), &config.classifier))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialOutcome {
        train_rows,
        test_rows,
        order: ranking.order,
        aucs,
    })
}

pub fn eval_pipeline(d: &Dataset, ranker: &dyn Ranker, config: &EvalConfig) -> Result<EvalReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    check_cardinalities(d, &config.cardinalities)?;
    let outcomes = (0..config.trials)
        .into_par_iter()
        .map(|t| eval_trial(d, ranker, config, t))
        .collect::<Result<Vec<_>>>()?;
    let (auc_mean, auc_std) = (0..config.cardinalities.len())
        .map(|i| mean_std(&outcomes.iter().map(|o| o.aucs[i]).collect::<Vec<_>>()))
        .unzip();
    Ok(EvalReport {
        schema: "1".into(),
        method: ranker.name(),
        seed: config.seed,
        trial_count: config.trials,
        cardinalities: config.cardinalities.clone(),
        auc_mean,
        auc_std,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityConfig {
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    /// Share of samples kept per trial; 1 ranks the full dataset each time.
    pub fraction: f64,
}

impl StabilityConfig {
    pub fn new(k: usize, trials: usize, seed: u64) -> Self {
        Self {
            k,
            trials,
            seed,
            fraction: 2.0 / 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub schema: String,
    pub method: String,
    pub seed: u64,
    pub k: usize,
    pub trial_count: usize,
    /// Kuncheva index of every trial pair (i < j), in lexicographic order.
    pub pairwise: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Ranks `trials` random subsamples and compares all pairs of top-`k` sets.
pub fn stability_experiment(d: &Dataset, ranker: &dyn Ranker, config: &StabilityConfig) -> Result<StabilityReport> {
    let n = d.n_features();
    if config.k == 0 || config.k >= n {
        return Err(Error::InvalidArgument(format!(
            "k must lie in (0, {n}), got {}",
            config.k
        )));
    }
    if config.trials < 2 {
        return Err(Error::InvalidArgument("stability needs at least two trials".into()));
    }
    let subsets = (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let seed = config.seed.wrapping_add(t as u64);
            let sample = dataset::subsample(d, config.fraction, seed)?;
            Ok(ranker.rank(&sample, seed)?.top(config.k).to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut pairwise = Vec::with_capacity(config.trials * (config.trials - 1) / 2);
    for i in 0..subsets.len() {
        for j in (i + 1)..subsets.len() {
            pairwise.push(kuncheva(&subsets[i], &subsets[j], n)?);
        }
    }
    let (mean, std) = mean_std(&pairwise);
    Ok(StabilityReport {
        schema: "1".into(),
        method: ranker.name(),
        seed: config.seed,
        k: config.k,
        trial_count: config.trials,
        pairwise,
        mean,
        std,
    })
}

/// Where the base columns of a mixture experiment come from.
#[derive(Debug, Clone, PartialEq)]
pub enum MixtureSource {
    /// Fresh independent Gaussians every trial.
    Gaussian { samples: usize, n_base: usize },
    /// Fixed base columns (e.g. Iris); only the mixing weights vary.
    Base(Dataset),
}

impl Default for MixtureSource {
    fn default() -> Self {
        MixtureSource::Gaussian {
            samples: 150,
            n_base: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryConfig {
    pub source: MixtureSource,
    pub mode: MixtureMode,
    pub n_mix: usize,
    pub trials: usize,
    pub seed: u64,
}

impl RecoveryConfig {
    pub fn new(source: MixtureSource, mode: MixtureMode, trials: usize, seed: u64) -> Self {
        Self {
            source,
            mode,
            n_mix: 16,
            trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub schema: String,
    pub method: String,
    pub mode: MixtureMode,
    pub seed: u64,
    pub trial_count: usize,
    /// Median 1-based rank of each base feature across trials.
    pub per_base_median_rank: Vec<f64>,
    pub base_mean_rank: f64,
    pub mixture_mean_rank: f64,
    /// Trials whose mean base rank beat the mean mixture rank.
    pub trials_base_better: usize,
}

/// Per-trial 1-based ranks of the base features and of the mixtures.
fn recovery_trial(config: &RecoveryConfig, ranker: &dyn Ranker, trial: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let seed = config.seed.wrapping_add(trial as u64);
    let mixture = match &config.source {
        MixtureSource::Gaussian { samples, n_base } => {
            dataset::gen_mixture_dataset(*samples, *n_base, config.n_mix, config.mode, seed)?
        }
        MixtureSource::Base(base) => dataset::mixture_from_base(base, config.n_mix, config.mode, seed)?,
    };
    let n_base = mixture.manifest.n_base;
    let positions = ranker.rank(&mixture.data, seed)?.positions();
    let ranks: Vec<f64> = positions.into_iter().map(|p| p as f64).collect();
    Ok((ranks[..n_base].to_vec(), ranks[n_base..].to_vec()))
}

/// Ranks base-plus-mixture datasets and reports where the base features land.
pub fn mixture_recovery(ranker: &dyn Ranker, config: &RecoveryConfig) -> Result<RecoveryReport> {
    if config.trials == 0 || config.n_mix == 0 {
        return Err(Error::InvalidArgument("need at least one trial and one mixture".into()));
    }
    let trials = (0..config.trials)
        .into_par_iter()
        .map(|t| recovery_trial(config, ranker, t))
        .collect::<Result<Vec<_>>>()?;
    let n_base = trials[0].0.len();
    let per_base_median_rank = (0..n_base)
        .map(|k| median(&mut trials.iter().map(|(b, _)| b[k]).collect::<Vec<_>>()))
        .collect();
    let base_means: Vec<f64> = trials.iter().map(|(b, _)| stats::mean(b)).collect();
    let mix_means: Vec<f64> = trials.iter().map(|(_, m)| stats::mean(m)).collect();
    let trials_base_better = base_means.iter().zip(&mix_means).filter(|(b, m)| b < m).count();
    Ok(RecoveryReport {
        schema: "1".into(),
        method: ranker.name(),
        mode: config.mode,
        seed: config.seed,
        trial_count: config.trials,
        per_base_median_rank,
        base_mean_rank: stats::mean(&base_means),
        mixture_mean_rank: stats::mean(&mix_means),
        trials_base_better,
    })
}
