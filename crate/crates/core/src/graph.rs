//! Feature-adjacency builders.
//!
//! Every builder returns an n x n nonnegative matrix whose entry (i, j)
//! weights the edge between features i and j.

use std::fmt;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::{sum_normalize, Dataset};
use crate::error::{Error, Result};
use crate::stats::{self, ClassSplit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjacencyMethod {
    /// Dispersion plus rank decorrelation, no labels.
    InfsUnsup,
    /// Fisher x mutual-information kernel plus dispersion.
    Ecfs,
    /// Outer product of averaged supervised metrics.
    InfsSup,
}

impl fmt::Display for AdjacencyMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AdjacencyMethod::InfsUnsup => "infs_unsup",
            AdjacencyMethod::Ecfs => "ecfs",
            AdjacencyMethod::InfsSup => "infs_sup",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    entries: Array2<f64>,
    method: AdjacencyMethod,
    alpha: Option<f64>,
    bins: Option<usize>,
}

/// JSON sidecar written next to the CSV dump of an adjacency matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencySidecar {
    pub schema: String,
    pub method: AdjacencyMethod,
    pub alpha: Option<f64>,
    pub bins: Option<usize>,
    pub n: usize,
}

impl AdjacencyMatrix {
    pub fn entries(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn into_entries(self) -> Array2<f64> {
        self.entries
    }

    pub fn method(&self) -> AdjacencyMethod {
        self.method
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn bins(&self) -> Option<usize> {
        self.bins
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn sidecar(&self) -> AdjacencySidecar {
        AdjacencySidecar {
            schema: "1".into(),
            method: self.method,
            alpha: self.alpha,
            bins: self.bins,
            n: self.n(),
        }
    }

    /// Row-major CSV without header.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        for row in self.entries.outer_iter() {
            writer.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    Ok(())
}

fn column_std(d: &Dataset) -> Result<Vec<f64>> {
    (0..d.n_features()).map(|j| stats::std_dev(&d.column(j))).collect()
}

/// Pairwise Spearman correlations of the columns of `values`.
///
/// Columns are ranked once, centred and scaled to unit norm, so the matrix
/// is a single Gram product. Constant columns correlate 0 with everything,
/// themselves included.
pub fn spearman_matrix(values: &Array2<f64>) -> Array2<f64> {
    let (samples, n) = values.dim();
    let mut z = Array2::<f64>::zeros((n, samples));
    let mut constant = vec![false; n];
    for j in 0..n {
        let ranks = stats::average_ranks(&values.column(j).to_vec());
        let centre = (samples + 1) as f64 / 2.0;
        let norm = ranks.iter().map(|r| (r - centre) * (r - centre)).sum::<f64>().sqrt();
        if norm == 0.0 {
            constant[j] = true;
            continue;
        }
        for (dst, r) in z.row_mut(j).iter_mut().zip(&ranks) {
            *dst = (r - centre) / norm;
        }
    }
    let mut c = z.dot(&z.t());
    for i in 0..n {
        c[[i, i]] = if constant[i] { 0.0 } else { 1.0 };
        for j in (i + 1)..n {
            let v = c[[i, j]].clamp(-1.0, 1.0);
            c[[i, j]] = v;
            c[[j, i]] = v;
        }
    }
    c
}

/// Unsupervised Inf-FS graph:
/// `a_ij = alpha * max(s_i, s_j) + (1 - alpha) * (1 - |spearman(f_i, f_j)|)`
/// where `s` is the per-feature standard deviation divided by its maximum.
pub fn build_infs_unsup(d: &Dataset, alpha: f64) -> Result<AdjacencyMatrix> {
    check_alpha(alpha)?;
    let sigma = column_std(d)?;
    let max_sigma = sigma.iter().copied().fold(0.0, f64::max);
    let sigma_hat: Vec<f64> = if max_sigma > 0.0 {
        sigma.iter().map(|s| s / max_sigma).collect()
    } else {
        vec![0.0; sigma.len()]
    };
    let corr = spearman_matrix(d.values());
    let entries = Array2::from_shape_fn(corr.dim(), |(i, j)| {
        alpha * sigma_hat[i].max(sigma_hat[j]) + (1.0 - alpha) * (1.0 - corr[[i, j]].abs())
    });
    Ok(AdjacencyMatrix {
        entries,
        method: AdjacencyMethod::InfsUnsup,
        alpha: Some(alpha),
        bins: None,
    })
}

/// Classes whose one-vs-rest splits are averaged. For two classes both
/// splits give the same value for every symmetric metric, so one suffices.
fn contrast_classes(d: &Dataset) -> Result<(Vec<i64>, &[i64])> {
    let labels = d.supervised_labels()?;
    let classes = d.classes();
    let contrast = if classes.len() == 2 { vec![classes[1]] } else { classes };
    Ok((contrast, labels))
}

fn one_vs_rest_mean<F>(d: &Dataset, metric: F) -> Result<Vec<f64>>
where
    F: Fn(&ClassSplit, &[f64], &[i64], i64) -> Result<f64>,
{
    let (contrast, labels) = contrast_classes(d)?;
    (0..d.n_features())
        .map(|j| {
            let x = d.column(j);
            let mut total = 0.0;
            for &c in &contrast {
                let split = ClassSplit::one_vs_rest(&x, labels, c);
                if split.positive.len() < 2 || split.negative.len() < 2 {
                    return Err(Error::ClassTooSmall {
                        class: c,
                        count: split.positive.len().min(split.negative.len()),
                    });
                }
                total += metric(&split, &x, labels, c)?;
            }
            Ok(total / contrast.len() as f64)
        })
        .collect()
}

/// Per-feature Fisher scores (one-vs-rest average for more than two classes).
pub fn fisher_scores(d: &Dataset) -> Result<Vec<f64>> {
    one_vs_rest_mean(d, |split, _, _, _| stats::fisher_score(split))
}

/// Per-feature mutual information (bits) with the full label set.
pub fn mi_scores(d: &Dataset, bins: usize) -> Result<Vec<f64>> {
    let labels = d.supervised_labels()?;
    (0..d.n_features())
        .map(|j| stats::mutual_information(&d.column(j), labels, bins))
        .collect()
}

/// `k = f m^T`.
pub fn ecfs_kernel(fisher: &[f64], mi: &[f64]) -> Array2<f64> {
    Array2::from_shape_fn((fisher.len(), mi.len()), |(i, j)| fisher[i] * mi[j])
}

/// Supervised eigenvector-centrality graph, `A = alpha k + (1 - alpha) S`.
///
/// Features are sum-normalized first. `k` is the outer product of the
/// min-max normalized Fisher and mutual-information vectors, and
/// `S_ij = max(sd_i, sd_j)` over the normalized features.
pub fn build_ecfs(d: &Dataset, alpha: f64, bins: usize) -> Result<AdjacencyMatrix> {
    check_alpha(alpha)?;
    d.supervised_labels()?;
    let normalized = sum_normalize(d).data;
    let f = stats::min_max_normalize(&fisher_scores(&normalized)?);
    let m = stats::min_max_normalize(&mi_scores(&normalized, bins)?);
    let sigma = column_std(&normalized)?;
    let kernel = ecfs_kernel(&f, &m);
    let entries = Array2::from_shape_fn(kernel.dim(), |(i, j)| {
        alpha * kernel[[i, j]] + (1.0 - alpha) * sigma[i].max(sigma[j])
    });
    Ok(AdjacencyMatrix {
        entries,
        method: AdjacencyMethod::Ecfs,
        alpha: Some(alpha),
        bins: Some(bins),
    })
}

/// The three per-feature discrimination metrics behind [`build_infs_sup`],
/// before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedMetrics {
    pub fisher: Vec<f64>,
    /// `1 - p` of the pooled two-sample t-test.
    pub t_confidence: Vec<f64>,
    /// `|pearson(feature, class indicator)|`.
    pub abs_pearson: Vec<f64>,
}

impl SupervisedMetrics {
    pub fn compute(d: &Dataset) -> Result<Self> {
        Ok(Self {
            fisher: fisher_scores(d)?,
            t_confidence: one_vs_rest_mean(d, |split, _, _, _| {
                stats::two_sample_t_pvalue(split).map(|p| 1.0 - p)
            })?,
            abs_pearson: one_vs_rest_mean(d, |_, x, labels, c| {
                let indicator: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l == c))).collect();
                stats::pearson(x, &indicator).map(f64::abs)
            })?,
        })
    }

    /// Mean of the three min-max normalized metrics.
    pub fn combined(&self) -> Vec<f64> {
        let f = stats::min_max_normalize(&self.fisher);
        let t = stats::min_max_normalize(&self.t_confidence);
        let c = stats::min_max_normalize(&self.abs_pearson);
        (0..f.len()).map(|i| (f[i] + t[i] + c[i]) / 3.0).collect()
    }
}

/// Supervised Inf-FS graph `A = s s^T`.
pub fn build_infs_sup(d: &Dataset) -> Result<AdjacencyMatrix> {
    let s = SupervisedMetrics::compute(d)?.combined();
    let entries = Array2::from_shape_fn((s.len(), s.len()), |(i, j)| s[i] * s[j]);
    Ok(AdjacencyMatrix {
        entries,
        method: AdjacencyMethod::InfsSup,
        alpha: None,
        bins: None,
    })
}
