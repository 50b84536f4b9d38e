//! Dataset ingestion, normalization, stratified splitting and synthetic
//! mixture generation.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const IRIS_CSV: &str = include_str!("../data/iris.csv");

/// Samples-by-features matrix with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Array2<f64>,
    labels: Option<Vec<i64>>,
    feature_names: Vec<String>,
    base_truth: Option<Vec<usize>>,
}

impl Dataset {
    /// Builds a dataset, checking shape, finiteness and name uniqueness.
    ///
    /// Passing `None` for `feature_names` assigns `f0..f{n-1}`.
    pub fn new(
        values: Array2<f64>,
        labels: Option<Vec<i64>>,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let (samples, features) = values.dim();
        if samples < 2 || features < 2 {
            return Err(Error::TooSmall { samples, features });
        }
        for ((row, column), v) in values.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row, column });
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != samples {
                return Err(Error::LengthMismatch {
                    left: labels.len(),
                    right: samples,
                });
            }
        }
        let feature_names =
            feature_names.unwrap_or_else(|| (0..features).map(|j| format!("f{j}")).collect());
        if feature_names.len() != features {
            return Err(Error::LengthMismatch {
                left: feature_names.len(),
                right: features,
            });
        }
        let mut seen = HashSet::new();
        for name in &feature_names {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(Self {
            values,
            labels,
            feature_names,
            base_truth: None,
        })
    }

    pub fn with_base_truth(mut self, base_truth: Vec<usize>) -> Self {
        self.base_truth = Some(base_truth);
        self
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn base_truth(&self) -> Option<&[usize]> {
        self.base_truth.as_deref()
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    /// Copy of feature column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.column(j).to_vec()
    }

    /// Sorted distinct class ids, empty when unlabeled.
    pub fn classes(&self) -> Vec<i64> {
        let mut classes: Vec<i64> = self.labels.iter().flatten().copied().collect();
        classes.sort_unstable();
        classes.dedup();
        classes
    }

    /// Labels, failing unless at least two classes are present.
    pub fn supervised_labels(&self) -> Result<&[i64]> {
        let labels = self.labels().ok_or(Error::MissingLabels)?;
        let classes = self.classes().len();
        if classes < 2 {
            return Err(Error::SingleClass(classes));
        }
        Ok(labels)
    }

    /// Restricts to the given sample rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let values = self.values.select(Axis(0), rows);
        let labels = self
            .labels
            .as_ref()
            .map(|l| rows.iter().map(|&i| l[i]).collect());
        let mut out = Self::new(values, labels, Some(self.feature_names.clone()))?;
        out.base_truth = self.base_truth.clone();
        Ok(out)
    }

    /// Restricts to the given feature columns, in the given order.
    pub fn select_features(&self, features: &[usize]) -> Array2<f64> {
        self.values.select(Axis(1), features)
    }

    /// Writes the dataset as CSV with a header row. Labels, when present,
    /// go in a trailing `label` column. Values are printed with the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut writer = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        if self.labels.is_some() {
            header.push("label");
        }
        writer.write_record(&header)?;
        for (i, row) in self.values.outer_iter().enumerate() {
            let mut record: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            if let Some(labels) = &self.labels {
                record.push(labels[i].to_string());
            }
            writer.write_record(&record)?;
        }
        writer.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

/// Which CSV column carries class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Plain non-negative integers are read as column indices.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => LabelColumn::Index(i),
            Err(_) => LabelColumn::Name(s.to_string()),
        })
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(n) => write!(f, "{n:?}"),
            LabelColumn::Index(i) => write!(f, "#{i}"),
        }
    }
}

/// Loads a comma-separated file. The first row is a header iff one of its
/// (non-label) cells fails to parse as a number.
pub fn load_csv(path: impl AsRef<Path>, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, label_column)
}

/// Same as [`load_csv`] over any reader.
pub fn read_csv<R: std::io::Read>(reader: R, label_column: Option<&LabelColumn>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<String>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    let Some(first) = rows.first() else {
        return Err(Error::TooSmall {
            samples: 0,
            features: 0,
        });
    };
    let width = first.len();

    let index_label = match label_column {
        Some(LabelColumn::Index(i)) => Some(*i),
        _ => None,
    };
    let has_header = first
        .iter()
        .enumerate()
        .any(|(j, cell)| Some(j) != index_label && cell.parse::<f64>().is_err());

    let label_idx = match label_column {
        None => None,
        Some(LabelColumn::Index(i)) if *i < width => Some(*i),
        Some(LabelColumn::Name(name)) if has_header => Some(
            first
                .iter()
                .position(|c| c == name)
                .ok_or_else(|| Error::MissingLabelColumn(name.clone()))?,
        ),
        Some(other) => return Err(Error::MissingLabelColumn(other.to_string())),
    };

    let feature_cols: Vec<usize> = (0..width).filter(|&j| Some(j) != label_idx).collect();
    let names = has_header.then(|| feature_cols.iter().map(|&j| first[j].clone()).collect());
    let data_rows = if has_header { &rows[1..] } else { &rows[..] };

    let mut flat = Vec::with_capacity(data_rows.len() * feature_cols.len());
    let mut raw_labels = Vec::with_capacity(data_rows.len());
    for (i, row) in data_rows.iter().enumerate() {
        let line = i + 1 + usize::from(has_header);
        if row.len() != width {
            return Err(Error::RaggedRow {
                row: line,
                expected: width,
                found: row.len(),
            });
        }
        for &j in &feature_cols {
            let v = row[j].parse::<f64>().map_err(|_| Error::NonNumeric {
                row: line,
                column: j + 1,
                value: row[j].clone(),
            })?;
            flat.push(v);
        }
        if let Some(l) = label_idx {
            raw_labels.push(row[l].clone());
        }
    }

    let values = Array2::from_shape_vec((data_rows.len(), feature_cols.len()), flat)
        .expect("row count times width matches buffer");
    let labels = label_idx.map(|_| encode_labels(&raw_labels));
    Dataset::new(values, labels, names)
}

/// Integer-valued labels are kept as-is; anything else is mapped to ids in
/// ascending string order.
fn encode_labels(raw: &[String]) -> Vec<i64> {
    let numeric: Option<Vec<i64>> = raw
        .iter()
        .map(|s| {
            s.parse::<i64>().ok().or_else(|| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.fract() == 0.0 && v.abs() < 9.0e15)
                    .map(|v| v as i64)
            })
        })
        .collect();
    if let Some(ids) = numeric {
        return ids;
    }
    let mut distinct: Vec<&str> = raw.iter().map(String::as_str).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let ids: BTreeMap<&str, i64> = distinct
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i as i64))
        .collect();
    raw.iter().map(|s| ids[s.as_str()]).collect()
}

/// Result of [`sum_normalize`]: the scaled data and the indices of columns
/// that were left at zero.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub data: Dataset,
    pub zero_columns: Vec<usize>,
}

/// Scales every column to sum to one. Columns with a negative entry are
/// first shifted by their minimum. Columns that end up all zero stay zero
/// and are reported.
pub fn sum_normalize(d: &Dataset) -> Normalized {
    let mut values = d.values.clone();
    let mut zero_columns = Vec::new();
    for (j, mut col) in values.axis_iter_mut(Axis(1)).enumerate() {
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        if min < 0.0 {
            col.mapv_inplace(|v| v - min);
        }
        let sum: f64 = col.sum();
        if sum == 0.0 {
            zero_columns.push(j);
        } else {
            col.mapv_inplace(|v| v / sum);
        }
    }
    Normalized {
        data: Dataset {
            values,
            ..d.clone()
        },
        zero_columns,
    }
}

/// Per-class shuffled split; returns sorted (train, test) row indices.
///
/// Each class contributes `round(train_fraction * class_size)` rows to the
/// train side.
pub fn stratified_indices(
    labels: &[i64],
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {train_fraction}"
        )));
    }
    let mut by_class: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (&class, members) in by_class.iter_mut() {
        if members.len() < 2 {
            return Err(Error::ClassTooSmall {
                class,
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        let take = (train_fraction * members.len() as f64).round() as usize;
        train.extend_from_slice(&members[..take]);
        test.extend_from_slice(&members[take..]);
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptySplit {
            fraction: train_fraction,
        });
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

pub fn split_stratified(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let labels = d.labels().ok_or(Error::MissingLabels)?;
    let (train, test) = stratified_indices(labels, train_fraction, seed)?;
    Ok((d.select_rows(&train)?, d.select_rows(&test)?))
}

/// Random subsample of rows: stratified when labels exist, plain otherwise.
/// A fraction of 1 returns the full dataset.
pub fn subsample(d: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if fraction >= 1.0 {
        return Ok(d.clone());
    }
    match d.labels() {
        Some(labels) => {
            let (train, _) = stratified_indices(labels, fraction, seed)?;
            d.select_rows(&train)
        }
        None => {
            if fraction <= 0.0 {
                return Err(Error::EmptySplit { fraction });
            }
            let mut rows: Vec<usize> = (0..d.n_samples()).collect();
            rows.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let take = ((fraction * rows.len() as f64).round() as usize).max(2);
            let mut rows = rows[..take.min(d.n_samples())].to_vec();
            rows.sort_unstable();
            d.select_rows(&rows)
        }
    }
}

/// How mixture columns are formed from the base columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixtureMode {
    /// Convex combination of the base features.
    Linear,
    /// Convex combination of the sine of the base features.
    Periodic,
}

impl FromStr for MixtureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(MixtureMode::Linear),
            "periodic" => Ok(MixtureMode::Periodic),
            _ => Err(Error::InvalidArgument(format!("unknown mixture mode {s:?}"))),
        }
    }
}

impl fmt::Display for MixtureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MixtureMode::Linear => "linear",
            MixtureMode::Periodic => "periodic",
        })
    }
}

/// Sidecar describing how a synthetic dataset was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureManifest {
    pub schema: String,
    pub mode: MixtureMode,
    pub seed: u64,
    pub samples: usize,
    pub n_base: usize,
    pub n_mix: usize,
    pub base_truth: Vec<usize>,
    /// One simplex weight vector per mixture column.
    pub weights: Vec<Vec<f64>>,
}

/// A base dataset extended with mixture columns.
#[derive(Debug, Clone)]
pub struct Mixture {
    pub data: Dataset,
    pub manifest: MixtureManifest,
}

/// Draws a weight vector uniformly from the probability simplex.
fn simplex_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn append_mixtures(
    base: &Array2<f64>,
    n_mix: usize,
    mode: MixtureMode,
    rng: &mut ChaCha8Rng,
) -> (Array2<f64>, Vec<Vec<f64>>) {
    let (samples, n_base) = base.dim();
    let source = match mode {
        MixtureMode::Linear => base.clone(),
        MixtureMode::Periodic => base.mapv(f64::sin),
    };
    let mut out = Array2::zeros((samples, n_base + n_mix));
    out.slice_mut(ndarray::s![.., ..n_base]).assign(base);
    let mut weights = Vec::with_capacity(n_mix);
    for m in 0..n_mix {
        let w = simplex_weights(rng, n_base);
        let mut col = out.column_mut(n_base + m);
        for (k, &wk) in w.iter().enumerate() {
            col.scaled_add(wk, &source.column(k));
        }
        weights.push(w);
    }
    (out, weights)
}

/// Synthetic benchmark: `n_base` independent unit-variance Gaussians with
/// means 0, 2, 4, ... followed by `n_mix` random convex mixtures. Labels
/// split the samples at the median of the first base feature.
pub fn gen_mixture_dataset(
    samples: usize,
    n_base: usize,
    n_mix: usize,
    mode: MixtureMode,
    seed: u64,
) -> Result<Mixture> {
    if samples < 2 || n_base < 2 {
        return Err(Error::TooSmall {
            samples,
            features: n_base,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base = Array2::zeros((samples, n_base));
    for k in 0..n_base {
        let dist = Normal::new(2.0 * k as f64, 1.0).expect("unit variance is valid");
        for v in base.column_mut(k) {
            *v = rng.sample(dist);
        }
    }
    let labels = median_split(&base.column(0).to_vec());
    let (values, weights) = append_mixtures(&base, n_mix, mode, &mut rng);
    let names = mixture_names(&(0..n_base).map(|k| format!("base{k}")).collect::<Vec<_>>(), n_mix);
    let base_truth: Vec<usize> = (0..n_base).collect();
    let data = Dataset::new(values, Some(labels), Some(names))?.with_base_truth(base_truth.clone());
    Ok(Mixture {
        data,
        manifest: MixtureManifest {
            schema: "1".into(),
            mode,
            seed,
            samples,
            n_base,
            n_mix,
            base_truth,
            weights,
        },
    })
}

/// Same construction as [`gen_mixture_dataset`] but over the columns of an
/// existing dataset, whose labels are kept.
pub fn mixture_from_base(base: &Dataset, n_mix: usize, mode: MixtureMode, seed: u64) -> Result<Mixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (values, weights) = append_mixtures(base.values(), n_mix, mode, &mut rng);
    let n_base = base.n_features();
    let names = mixture_names(base.feature_names(), n_mix);
    let base_truth: Vec<usize> = (0..n_base).collect();
    let labels = base.labels().map(<[i64]>::to_vec);
    let data = Dataset::new(values, labels, Some(names))?.with_base_truth(base_truth.clone());
    Ok(Mixture {
        data,
        manifest: MixtureManifest {
            schema: "1".into(),
            mode,
            seed,
            samples: base.n_samples(),
            n_base,
            n_mix,
            base_truth,
            weights,
        },
    })
}

fn mixture_names(base: &[String], n_mix: usize) -> Vec<String> {
    base.iter()
        .cloned()
        .chain((0..n_mix).map(|m| format!("mix{m}")))
        .collect()
}

fn median_split(x: &[f64]) -> Vec<i64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 0 {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    x.iter().map(|&v| i64::from(v > median)).collect()
}

/// Fisher's Iris measurements (150 x 4, classes 0..2), bundled with the crate.
pub fn load_iris() -> Dataset {
    read_csv(IRIS_CSV.as_bytes(), Some(&LabelColumn::Name("species".into())))
        .expect("bundled iris table is well formed")
}
