//! Scalar statistics used by the adjacency builders and baseline rankers.
//!
//! Variances use the sample divisor `len - 1`. Correlations of a
//! zero-variance input are defined as 0.

use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

/// Guards the Fisher denominator when both classes are constant.
pub const FISHER_EPS: f64 = 1e-12;

/// Default histogram resolution for [`mutual_information`].
pub const DEFAULT_BINS: usize = 16;

fn require_len(x: &[f64], needed: usize) -> Result<()> {
    if x.len() < needed {
        return Err(Error::TooFewValues {
            needed,
            got: x.len(),
        });
    }
    Ok(())
}

fn require_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

fn is_constant(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn variance(x: &[f64]) -> Result<f64> {
    require_len(x, 2)?;
    if is_constant(x) {
        return Ok(0.0);
    }
    let m = mean(x);
    Ok(x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64)
}

pub fn std_dev(x: &[f64]) -> Result<f64> {
    variance(x).map(f64::sqrt)
}

/// 1-based ranks with ties given the average of the positions they span.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < idx.len() {
        let mut end = start + 1;
        while end < idx.len() && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + end + 1) as f64 / 2.0;
        for &i in &idx[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Sample Pearson correlation; 0 when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    require_same_len(x.len(), y.len())?;
    require_len(x, 2)?;
    if is_constant(x) || is_constant(y) {
        return Ok(0.0);
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    require_same_len(x.len(), y.len())?;
    require_len(x, 2)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// One feature's values split by class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSplit {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
}

impl ClassSplit {
    pub fn new(positive: Vec<f64>, negative: Vec<f64>) -> Self {
        Self { positive, negative }
    }

    /// `positive` holds the values whose label equals `class`, `negative`
    /// everything else.
    pub fn one_vs_rest(x: &[f64], labels: &[i64], class: i64) -> Self {
        let (mut positive, mut negative) = (Vec::new(), Vec::new());
        for (&v, &l) in x.iter().zip(labels) {
            if l == class {
                positive.push(v);
            } else {
                negative.push(v);
            }
        }
        Self { positive, negative }
    }

    fn check(&self) -> Result<()> {
        require_len(&self.positive, 2)?;
        require_len(&self.negative, 2)
    }
}

/// `(mu1 - mu2)^2 / (var1 + var2 + eps)`.
pub fn fisher_score(split: &ClassSplit) -> Result<f64> {
    split.check()?;
    let diff = mean(&split.positive) - mean(&split.negative);
    let spread = variance(&split.positive)? + variance(&split.negative)?;
    Ok(diff * diff / (spread + FISHER_EPS))
}

/// Plug-in mutual information (bits) between an equal-width histogram of
/// `x` and the class labels.
pub fn mutual_information(x: &[f64], labels: &[i64], bins: usize) -> Result<f64> {
    require_same_len(x.len(), labels.len())?;
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("bins must be >= 2, got {bins}")));
    }
    if x.is_empty() {
        return Ok(0.0);
    }
    let mut classes = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();

    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = hi - lo;
    let bin_of = |v: f64| -> usize {
        if width > 0.0 {
            (((v - lo) / width * bins as f64) as usize).min(bins - 1)
        } else {
            0
        }
    };

    let mut joint = vec![0usize; bins * classes.len()];
    for (&v, l) in x.iter().zip(labels) {
        let c = classes.binary_search(l).expect("label drawn from classes");
        joint[bin_of(v) * classes.len() + c] += 1;
    }
    Ok(mi_from_counts(&joint, bins, classes.len()))
}

/// Mutual information (bits) of a row-major `rows x cols` contingency table.
pub fn mi_from_counts(joint: &[usize], rows: usize, cols: usize) -> f64 {
    let total: usize = joint.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let n = total as f64;
    let row_sums: Vec<usize> = (0..rows)
        .map(|r| joint[r * cols..(r + 1) * cols].iter().sum())
        .collect();
    let col_sums: Vec<usize> = (0..cols)
        .map(|c| (0..rows).map(|r| joint[r * cols + c]).sum())
        .collect();
    let mut mi = 0.0;
    for r in 0..rows {
        for c in 0..cols {
            let count = joint[r * cols + c];
            if count == 0 {
                continue;
            }
            let pxy = count as f64 / n;
            let px = row_sums[r] as f64 / n;
            let py = col_sums[c] as f64 / n;
            mi += pxy * (pxy / (px * py)).log2();
        }
    }
    mi.max(0.0)
}

/// Pooled-variance two-sample t statistic and its degrees of freedom.
///
/// Returns an infinite statistic when the pooled variance is zero but the
/// means differ, and 0 when both vanish.
pub fn pooled_t_statistic(split: &ClassSplit) -> Result<(f64, f64)> {
    split.check()?;
    let (n1, n2) = (split.positive.len() as f64, split.negative.len() as f64);
    let df = n1 + n2 - 2.0;
    let diff = mean(&split.positive) - mean(&split.negative);
    let pooled = ((n1 - 1.0) * variance(&split.positive)? + (n2 - 1.0) * variance(&split.negative)?) / df;
    let se = (pooled * (1.0 / n1 + 1.0 / n2)).sqrt();
    let t = if se > 0.0 {
        diff / se
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok((t, df))
}

/// Two-sided p-value of `t` under Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Two-sided p-value of the pooled two-sample t-test.
pub fn two_sample_t_pvalue(split: &ClassSplit) -> Result<f64> {
    let (t, df) = pooled_t_statistic(split)?;
    Ok(student_t_two_sided(t, df))
}

/// Rescales to [0, 1]. A constant vector maps to `v / max` (so all ones for
/// a positive constant, all zeros for zero).
pub fn min_max_normalize(v: &[f64]) -> Vec<f64> {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        v.iter().map(|x| (x - lo) / (hi - lo)).collect()
    } else if hi > 0.0 {
        vec![1.0; v.len()]
    } else {
        vec![0.0; v.len()]
    }
}
