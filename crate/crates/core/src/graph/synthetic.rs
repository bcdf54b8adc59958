use rand::Rng;

use super::{Graph, GraphError};
use crate::rng::{self, Stream};

/// Random graph models for desk-scale experiments.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticKind {
    /// G(n, p): every pair independently with probability `p`.
    ErdosRenyi { nodes: usize, p: f64 },
    /// Stochastic block model with contiguous blocks of the given sizes.
    Sbm {
        block_sizes: Vec<usize>,
        p_in: f64,
        p_out: f64,
    },
}

fn check_probability(name: &str, p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::Argument(format!(
            "{name} must lie in [0, 1], got {p}"
        )))
    }
}

/// Samples a simple undirected graph. Pairs are visited in lexicographic
/// order and each consumes exactly one uniform draw.
pub fn synthetic_graph(kind: &SyntheticKind, seed: u64) -> Result<Graph, GraphError> {
    let mut rng = rng::stream(seed, Stream::Synthetic);
    match kind {
        SyntheticKind::ErdosRenyi { nodes, p } => {
            check_probability("p", *p)?;
            let n = *nodes;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen::<f64>() < *p {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, edges)
        }
        SyntheticKind::Sbm {
            block_sizes,
            p_in,
            p_out,
        } => {
            check_probability("p_in", *p_in)?;
            check_probability("p_out", *p_out)?;
            let block = sbm_blocks(block_sizes);
            let n = block.len();
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    let p = if block[u] == block[v] { *p_in } else { *p_out };
                    if rng.gen::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, edges)
        }
    }
}

/// Block index of every node for an SBM with the given block sizes.
pub fn sbm_blocks(block_sizes: &[usize]) -> Vec<usize> {
    block_sizes
        .iter()
        .enumerate()
        .flat_map(|(b, &size)| std::iter::repeat_n(b, size))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erdos_renyi_extremes() {
        let empty = synthetic_graph(&SyntheticKind::ErdosRenyi { nodes: 10, p: 0.0 }, 1).unwrap();
        assert_eq!(empty.node_count(), 10);
        assert_eq!(empty.edge_count(), 0);
        let full = synthetic_graph(&SyntheticKind::ErdosRenyi { nodes: 10, p: 1.0 }, 1).unwrap();
        assert_eq!(full.edge_count(), 45);
    }

    #[test]
    fn sbm_edge_count_near_expectation() {
        // Expected edges: 0.3 * 2 * C(50,2) + 0.02 * 50 * 50 = 735 + 50 = 785.
        // Variance: 1225*2*0.3*0.7 + 2500*0.02*0.98 = 514.5 + 49 = 563.5.
        let blocks = vec![50, 50];
        let within = 2.0 * (50.0 * 49.0 / 2.0);
        let across = 2500.0;
        let mean = 0.3 * within + 0.02 * across;
        let var = within * 0.3 * 0.7 + across * 0.02 * 0.98;
        assert!((mean - 785.0_f64).abs() < 1e-9);
        let g = synthetic_graph(
            &SyntheticKind::Sbm {
                block_sizes: blocks,
                p_in: 0.3,
                p_out: 0.02,
            },
            7,
        )
        .unwrap();
        assert_eq!(g.node_count(), 100);
        let dev = (g.edge_count() as f64 - mean).abs();
        assert!(
            dev <= 4.0 * var.sqrt(),
            "edges {} vs {mean}",
            g.edge_count()
        );
    }

    #[test]
    fn sbm_is_denser_inside_blocks() {
        let sizes = [40, 40, 40];
        let g = synthetic_graph(
            &SyntheticKind::Sbm {
                block_sizes: sizes.to_vec(),
                p_in: 0.4,
                p_out: 0.01,
            },
            3,
        )
        .unwrap();
        let blocks = sbm_blocks(&sizes);
        let inside = g
            .edges()
            .iter()
            .filter(|&&(u, v)| blocks[u] == blocks[v])
            .count();
        assert!(inside as f64 > 0.8 * g.edge_count() as f64);
    }

    #[test]
    fn probabilities_are_checked() {
        for kind in [
            SyntheticKind::ErdosRenyi { nodes: 5, p: 1.5 },
            SyntheticKind::ErdosRenyi { nodes: 5, p: -0.1 },
            SyntheticKind::Sbm {
                block_sizes: vec![2, 2],
                p_in: 0.5,
                p_out: f64::NAN,
            },
        ] {
            assert!(matches!(
                synthetic_graph(&kind, 0),
                Err(GraphError::Argument(_))
            ));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let kind = SyntheticKind::ErdosRenyi { nodes: 40, p: 0.2 };
        assert_eq!(synthetic_graph(&kind, 9), synthetic_graph(&kind, 9));
        assert_ne!(synthetic_graph(&kind, 9), synthetic_graph(&kind, 10));
    }
}
