//! Graph-based feature ranking.
//!
//! Features are nodes of a weighted graph; a feature's importance is read off
//! the graph either by summing the energy of every path through it
//! (Infinite Feature Selection, [`ranking::infs_scores`]) or by its
//! eigenvector centrality ([`ranking::ec_scores`]). Three adjacency builders
//! live in [`graph`]; [`eval`] holds the stability, AUC and mixture-recovery
//! harnesses used to compare rankers.

pub mod cli;
pub mod classifier;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod graph;
pub mod json;
pub mod linalg;
pub mod ranking;
pub mod stats;

pub use dataset::{Dataset, MixtureMode};
pub use error::{Error, Result};
pub use graph::{AdjacencyMatrix, AdjacencyMethod};
pub use ranking::{Method, MethodRanker, RankParams, Ranker, Ranking};
