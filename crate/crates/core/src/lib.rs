//! Link-prediction ensembles.
//!
//! Base scorers (neighborhood heuristics and a small message-passing network)
//! produce one score column per model over a fixed list of labelled node
//! pairs. The columns are normalized, blended with weights on the probability
//! simplex, and the weights are searched with a Tree-structured Parzen
//! Estimator against validation Hits@K.
//!
//! Modules:
//!
//! - [`graph`]: undirected graphs, edge-list I/O, train/valid/test splits, synthetic generators
//! - [`predictors`]: heuristic scores and the trainable [`predictors::GnnScorer`]
//! - [`metrics`]: Hits@K and AUC
//! - [`ensemble`]: score tables, normalization, simplex weights and blend objectives
//! - [`tpe`]: the Parzen estimators and the sequential optimizer
pub mod ensemble;
pub mod graph;
pub mod metrics;
pub mod predictors;
pub mod rng;
pub mod tpe;

pub use ensemble::{ScoreTable, WeightVector};
pub use graph::{Graph, LinkSplit, Pair};
pub use metrics::EvalResult;
