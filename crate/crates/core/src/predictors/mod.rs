//! Base link predictors that fill the columns of a score table.

mod gnn;
mod heuristics;

pub use gnn::{
    gnn_forward, gnn_train, logistic, Aggregation, GnnConfig, GnnScorer, Gradients, Optimizer,
    PairBatch, Propagation, TrainConfig,
};
pub use heuristics::{heuristic_score, HeuristicKind};

use thiserror::Error;

use crate::graph::{Graph, GraphError, Pair};

#[derive(Debug, Error, PartialEq)]
pub enum PredictError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Training { epoch: usize, loss: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Something that can score node pairs against a (training) graph.
#[derive(Debug, Clone, Copy)]
pub enum Predictor<'a> {
    Heuristic(HeuristicKind),
    Gnn(&'a GnnScorer),
}

/// Scores `pairs` in order. `graph` must be the training graph so that held
/// out edges never inform their own scores.
pub fn score_column(
    predictor: Predictor<'_>,
    graph: &Graph,
    pairs: &[Pair],
) -> Result<Vec<f64>, PredictError> {
    match predictor {
        Predictor::Heuristic(kind) => pairs
            .iter()
            .map(|&p| heuristic_score(graph, p, kind))
            .collect(),
        Predictor::Gnn(model) => model.score_pairs(graph, pairs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_contracts() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let cn = Predictor::Heuristic(HeuristicKind::CommonNeighbors);
        assert_eq!(score_column(cn, &g, &[]).unwrap(), Vec::<f64>::new());
        assert_eq!(score_column(cn, &g, &[(0, 2)]).unwrap(), vec![1.0]);
        assert!(score_column(cn, &g, &[(0, 3)]).is_err());

        let model = GnnScorer::init(3, &GnnConfig::default(), 0).unwrap();
        let pairs = [(0, 2), (1, 2), (0, 1)];
        let col = score_column(Predictor::Gnn(&model), &g, &pairs).unwrap();
        assert_eq!(col.len(), 3);
        for (i, &p) in pairs.iter().enumerate() {
            assert_eq!(col[i], gnn_forward(&model, &g, p).unwrap());
        }
    }
}
