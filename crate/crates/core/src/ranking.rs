//! Feature scores from adjacency matrices.
//!
//! # Infinite Feature Selection
//!
//! With `A` the feature graph, the energy of all paths of length `l`
//! leaving feature `i` is `(A^l e)_i`. Weighting length `l` by `r^l` and
//! summing over every length gives
//!
//! ```text
//! s = sum_{l>=1} (rA)^l e = ((I - rA)^{-1} - I) e
//! ```
//!
//! which converges when `r rho(A) < 1`. [`infs_scores`] takes
//! `r = r_factor / rho(A)` and obtains `s` from one LU solve
//! `(I - rA) x = e`, `s = x - e`, without forming the inverse.
//!
//! # Eigenvector centrality
//!
//! [`ec_scores`] returns the Perron vector of `A`, the limit of the
//! normalized `A^l e`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::graph;
use crate::linalg;
use crate::stats::DEFAULT_BINS;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
pub const DEFAULT_R_FACTOR: f64 = 0.9;
pub const DEFAULT_ALPHA: f64 = 0.2;

/// Largest tolerated `||(I - rA)x - e||_inf` before `r` is shrunk.
const SOLVE_RESIDUAL_TOL: f64 = 1e-8;
const MAX_SHRINKS: usize = 5;

/// Estimate of the spectral radius of a nonnegative matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralRadius {
    pub value: f64,
    /// True when power iteration did not settle and `value` is the
    /// average 2-row-sum upper bound instead.
    pub is_bound: bool,
    pub iterations: usize,
}

/// Dominant eigenvalue magnitude by power iteration from the all-ones
/// vector, stopping when successive Rayleigh quotients agree to
/// `tol * current`.
pub fn spectral_radius(a: ArrayView2<'_, f64>, tol: f64, max_iter: usize) -> Result<SpectralRadius> {
    let n = linalg::require_square(a)?;
    linalg::require_nonnegative(a)?;
    let mut x = Array1::<f64>::ones(n);
    let mut previous = f64::NAN;
    for iteration in 1..=max_iter {
        let y = a.dot(&x);
        let scale = y.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 {
            // A^k e = 0 for nonnegative A means A is nilpotent
            return Ok(SpectralRadius {
                value: 0.0,
                is_bound: false,
                iterations: iteration,
            });
        }
        let estimate = x.dot(&y) / x.dot(&x);
        if (estimate - previous).abs() <= tol * estimate.abs() {
            return Ok(SpectralRadius {
                value: estimate,
                is_bound: false,
                iterations: iteration,
            });
        }
        previous = estimate;
        x = y / scale;
    }
    Ok(SpectralRadius {
        value: linalg::average_two_row_sum_bound(a),
        is_bound: true,
        iterations: max_iter,
    })
}

/// `sum_{l=1}^{L} (rA)^l e` by repeated matrix-vector products.
pub fn truncated_geometric(a: ArrayView2<'_, f64>, r: f64, terms: usize) -> Vec<f64> {
    let mut term = Array1::<f64>::ones(a.nrows());
    let mut total = Array1::<f64>::zeros(a.nrows());
    for _ in 0..terms {
        term = a.dot(&term) * r;
        total += &term;
    }
    total.to_vec()
}

/// `(I - rA)^{-1}`, the full resolvent. With `r = 1` and `A` the transient
/// block of an absorbing Markov chain this is the fundamental matrix.
pub fn resolvent(a: ArrayView2<'_, f64>, r: f64) -> Result<Array2<f64>> {
    linalg::require_square(a)?;
    linalg::lu_inverse(linalg::shifted_identity(a, r).view()).ok_or(Error::SolveFailed {
        r,
        residual: f64::INFINITY,
    })
}

/// Solves `(I - rA) x = e` and returns `x - e` with the solve residual.
pub fn geometric_series_scores(a: ArrayView2<'_, f64>, r: f64) -> Result<(Vec<f64>, f64)> {
    let n = linalg::require_square(a)?;
    let system = linalg::shifted_identity(a, r);
    let ones = vec![1.0; n];
    let x = linalg::lu_solve(system.view(), &ones).ok_or(Error::SolveFailed {
        r,
        residual: f64::INFINITY,
    })?;
    let lhs = system.dot(&Array1::from(x.clone()));
    let residual = linalg::inf_norm_diff(lhs.as_slice().expect("contiguous"), &ones);
    Ok((x.into_iter().map(|v| v - 1.0).collect(), residual))
}

/// Inf-FS scores with their provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct InfsScores {
    pub scores: Vec<f64>,
    /// Path-length weight actually used.
    pub r: f64,
    pub rho: SpectralRadius,
}

/// Inf-FS energy scores with `r = r_factor / rho(A)`.
///
/// `r` is shrunk by 10% (up to five times) whenever the solve residual
/// exceeds 1e-8, `r rho` reaches 1, or the solution is not a convergent
/// series of nonnegative terms (some `x_i < 1`). An all-zero matrix gives
/// all-zero scores.
pub fn infs_scores(a: ArrayView2<'_, f64>, r_factor: f64) -> Result<InfsScores> {
    linalg::require_square(a)?;
    linalg::require_nonnegative(a)?;
    if !(r_factor > 0.0 && r_factor.is_finite()) {
        return Err(Error::InvalidArgument(format!("r factor must be positive, got {r_factor}")));
    }
    let rho = spectral_radius(a, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    if rho.value == 0.0 {
        return Ok(InfsScores {
            scores: vec![0.0; a.nrows()],
            r: 0.0,
            rho,
        });
    }
    let mut r = r_factor / rho.value;
    let mut last_residual = f64::INFINITY;
    for _ in 0..=MAX_SHRINKS {
        if r * rho.value < 1.0 {
            if let Ok((scores, residual)) = geometric_series_scores(a, r) {
                last_residual = residual;
                let convergent = scores.iter().all(|&s| s.is_finite() && s >= -1e-12);
                if residual <= SOLVE_RESIDUAL_TOL && convergent {
                    return Ok(InfsScores { scores, r, rho });
                }
            }
        }
        r *= 0.9;
    }
    Err(Error::SolveFailed {
        r,
        residual: last_residual,
    })
}

/// Leading eigenvector by power iteration from the uniform vector, unit
/// 1-norm, largest entry positive. Converged when successive iterates
/// differ by at most `tol` in the infinity norm.
pub fn ec_scores(a: ArrayView2<'_, f64>, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = linalg::require_square(a)?;
    linalg::require_nonnegative(a)?;
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let mut x = Array1::<f64>::from_elem(n, 1.0 / n as f64);
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let mut y = a.dot(&x);
        let norm: f64 = y.iter().map(|v| v.abs()).sum();
        if norm == 0.0 {
            return Err(Error::NoConvergence {
                iterations: max_iter,
                residual,
            });
        }
        y /= norm;
        residual = linalg::inf_norm_diff(y.as_slice().unwrap(), x.as_slice().unwrap());
        x = y;
        if residual <= tol {
            let pivot = x.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
            if pivot < 0.0 {
                x.mapv_inplace(|v| -v);
            }
            return Ok(x.to_vec());
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Ordered feature scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub method: String,
    pub params: BTreeMap<String, f64>,
    pub scores: Vec<f64>,
    /// Feature indices by descending score, ties by ascending index.
    pub order: Vec<usize>,
}

impl Ranking {
    /// 1-based position of every feature in `order`.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (rank, &feature) in self.order.iter().enumerate() {
            pos[feature] = rank + 1;
        }
        pos
    }

    pub fn top(&self, k: usize) -> &[usize] {
        &self.order[..k.min(self.order.len())]
    }
}

pub fn rank_features(scores: Vec<f64>, method: &str, params: BTreeMap<String, f64>) -> Result<Ranking> {
    if let Some(index) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFiniteScore { index });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    Ok(Ranking {
        method: method.to_string(),
        params,
        scores,
        order,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    InfsUnsup,
    InfsSup,
    Ecfs,
    Fisher,
    Mi,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::InfsUnsup, Method::InfsSup, Method::Ecfs, Method::Fisher, Method::Mi];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::InfsUnsup => "infs_unsup",
            Method::InfsSup => "infs_sup",
            Method::Ecfs => "ecfs",
            Method::Fisher => "fisher",
            Method::Mi => "mi",
        }
    }

    pub fn is_supervised(self) -> bool {
        self != Method::InfsUnsup
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Accepts both `snake_case` and `kebab-case`.
    fn from_str(s: &str) -> Result<Self> {
        let key = s.replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// Tunables for [`rank_with_method`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankParams {
    pub alpha: f64,
    pub bins: usize,
    pub r_factor: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RankParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            bins: DEFAULT_BINS,
            r_factor: DEFAULT_R_FACTOR,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

/// Ranks the features of `d` with one of the built-in methods.
pub fn rank_with_method(d: &Dataset, method: Method, params: &RankParams) -> Result<Ranking> {
    let mut recorded = BTreeMap::new();
    let scores = match method {
        Method::InfsUnsup => {
            let a = graph::build_infs_unsup(d, params.alpha)?;
            let out = infs_scores(a.entries().view(), params.r_factor)?;
            recorded.insert("alpha".into(), params.alpha);
            recorded.insert("r_factor".into(), params.r_factor);
            recorded.insert("r".into(), out.r);
            out.scores
        }
        Method::InfsSup => {
            let a = graph::build_infs_sup(d)?;
            let out = infs_scores(a.entries().view(), params.r_factor)?;
            recorded.insert("r_factor".into(), params.r_factor);
            recorded.insert("r".into(), out.r);
            out.scores
        }
        Method::Ecfs => {
            let a = graph::build_ecfs(d, params.alpha, params.bins)?;
            recorded.insert("alpha".into(), params.alpha);
            recorded.insert("bins".into(), params.bins as f64);
            ec_scores(a.entries().view(), params.tol, params.max_iter)?
        }
        Method::Fisher => graph::fisher_scores(d)?,
        Method::Mi => {
            recorded.insert("bins".into(), params.bins as f64);
            graph::mi_scores(d, params.bins)?
        }
    };
    rank_features(scores, method.as_str(), recorded)
}

/// Anything that can order the features of a dataset.
///
/// `seed` is the per-trial seed handed down by the evaluation harness;
/// deterministic rankers ignore it.
pub trait Ranker: Sync {
    fn name(&self) -> String;
    fn rank(&self, d: &Dataset, seed: u64) -> Result<Ranking>;
}

/// A built-in [`Method`] with fixed parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodRanker {
    pub method: Method,
    pub params: RankParams,
}

impl MethodRanker {
    pub fn new(method: Method, params: RankParams) -> Self {
        Self { method, params }
    }
}

impl Ranker for MethodRanker {
    fn name(&self) -> String {
        self.method.as_str().to_string()
    }

    fn rank(&self, d: &Dataset, _seed: u64) -> Result<Ranking> {
        rank_with_method(d, self.method, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{array, Array2};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn spectral_radius_examples() {
        for n in [1, 3, 7] {
            let rho = spectral_radius(Array2::<f64>::eye(n).view(), DEFAULT_TOL, 100).unwrap();
            assert_eq!(rho.value, 1.0);
            assert!(!rho.is_bound);
        }
        let rho = spectral_radius(array![[0.0, 2.0], [2.0, 0.0]].view(), DEFAULT_TOL, 100).unwrap();
        assert_eq!(rho.value, 2.0);
        assert!(spectral_radius(array![[0.0, -1.0], [1.0, 0.0]].view(), DEFAULT_TOL, 100).is_err());
        let nilpotent = array![[0.0, 1.0], [0.0, 0.0]];
        assert_eq!(spectral_radius(nilpotent.view(), DEFAULT_TOL, 100).unwrap().value, 0.0);
    }

    #[test]
    fn spectral_radius_falls_back_to_bound() {
        // periodic: Rayleigh quotients from e oscillate forever
        let a = array![[0.0, 1.0], [4.0, 0.0]];
        let rho = spectral_radius(a.view(), DEFAULT_TOL, 50).unwrap();
        assert!(rho.is_bound);
        assert!(rho.value >= 2.0);
    }

    #[test]
    fn infs_zero_matrix_scores_zero() {
        let out = infs_scores(Array2::<f64>::zeros((3, 3)).view(), 0.9).unwrap();
        assert_eq!(out.scores, vec![0.0; 3]);
    }

    #[test]
    fn infs_row_sum_one_closed_form() {
        let out = infs_scores(array![[0.0, 1.0], [1.0, 0.0]].view(), 0.9).unwrap();
        assert!(close(out.r, 0.9, 1e-15));
        assert!(close(out.scores[0], 9.0, 1e-12));
        assert!(close(out.scores[1], 9.0, 1e-12));
    }

    #[test]
    fn infs_handles_periodic_matrix_via_bound() {
        let a = array![[0.0, 1.0], [4.0, 0.0]];
        let out = infs_scores(a.view(), 0.9).unwrap();
        assert!(out.rho.is_bound);
        let brute = truncated_geometric(a.view(), out.r, 2000);
        for (s, b) in out.scores.iter().zip(&brute) {
            assert!(close(*s, *b, 1e-9 * b.abs().max(1.0)));
        }
    }

    #[test]
    fn truncated_geometric_examples() {
        let a = array![[1.0, 2.0], [0.5, 0.0]];
        assert_eq!(truncated_geometric(a.view(), 0.5, 1), vec![1.5, 0.25]);
        let swap = array![[0.0, 1.0], [1.0, 0.0]];
        assert_eq!(truncated_geometric(swap.view(), 0.5, 2), vec![0.75, 0.75]);
    }

    #[test]
    fn ec_scores_examples() {
        let v = ec_scores(array![[0.0, 1.0], [1.0, 0.0]].view(), DEFAULT_TOL, 100).unwrap();
        assert_eq!(v, vec![0.5, 0.5]);
        let v = ec_scores(array![[2.0, 1.0], [1.0, 1.0]].view(), DEFAULT_TOL, 1000).unwrap();
        let golden = (5f64.sqrt() - 1.0) / 2.0;
        assert!(close(v[0], 1.0 / (1.0 + golden), 1e-9));
        assert!(close(v[1], golden / (1.0 + golden), 1e-9));
        assert!(close(v[0], 0.618, 1e-3));
    }

    #[test]
    fn ec_scores_scale_invariant() {
        let a = array![[1.0, 0.3, 2.0], [0.5, 0.2, 0.1], [0.7, 0.9, 1.1]];
        let v = ec_scores(a.view(), DEFAULT_TOL, 1000).unwrap();
        let w = ec_scores((a * 37.5).view(), DEFAULT_TOL, 1000).unwrap();
        assert!(linalg::inf_norm_diff(&v, &w) < 1e-9);
    }

    #[test]
    fn ec_scores_errors() {
        assert!(matches!(
            ec_scores(Array2::<f64>::zeros((2, 2)).view(), DEFAULT_TOL, 10),
            Err(Error::ZeroMatrix)
        ));
        // period-2 chain never settles from a non-eigenvector start
        let a = array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        let err = ec_scores(array![[0.0, 1.0], [4.0, 0.0]].view(), DEFAULT_TOL, 50).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { iterations: 50, .. }));
        assert!(ec_scores(a.view(), DEFAULT_TOL, 10_000).is_ok());
    }

    #[test]
    fn rank_features_examples() {
        let r = rank_features(vec![0.2, 0.9, 0.5], "x", BTreeMap::new()).unwrap();
        assert_eq!(r.order, vec![1, 2, 0]);
        assert_eq!(r.positions(), vec![3, 1, 2]);
        let r = rank_features(vec![1.0; 4], "x", BTreeMap::new()).unwrap();
        assert_eq!(r.order, vec![0, 1, 2, 3]);
        let err = rank_features(vec![1.0, f64::NAN], "x", BTreeMap::new()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteScore { index: 1 }));
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
            assert_eq!(m.as_str().replace('_', "-").parse::<Method>().unwrap(), m);
        }
        assert!("svm".parse::<Method>().is_err());
    }

    #[test]
    fn dispatcher_records_params_and_checks_labels() {
        let d = Dataset::new(
            array![[0., 5., 1.], [0., 5., 3.], [1., 5., 2.], [1., 5., 4.]],
            Some(vec![0, 0, 1, 1]),
            None,
        )
        .unwrap();
        let r = rank_with_method(&d, Method::Fisher, &RankParams::default()).unwrap();
        assert_eq!(r.order[0], 0);
        let r = rank_with_method(&d, Method::InfsUnsup, &RankParams::default()).unwrap();
        assert_eq!(r.params["alpha"], 0.2);
        let mut sorted = r.order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);
        let r = rank_with_method(&d, Method::Ecfs, &RankParams::default()).unwrap();
        let mut sorted = r.order.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2]);

        let unlabeled = Dataset::new(d.values().clone(), None, None).unwrap();
        for m in [Method::InfsSup, Method::Ecfs, Method::Fisher, Method::Mi] {
            assert!(matches!(
                rank_with_method(&unlabeled, m, &RankParams::default()),
                Err(Error::MissingLabels)
            ));
        }
    }
}
