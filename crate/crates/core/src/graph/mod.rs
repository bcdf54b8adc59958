//! Undirected simple graphs with dense integer node ids.

mod io;
mod split;
mod synthetic;

pub use io::{read_edge_list, read_pairs, write_edge_list, write_pairs, PairList};
pub use split::{make_split, sample_non_edges, LinkSplit, SplitConfig};
pub use synthetic::{sbm_blocks, synthetic_graph, SyntheticKind};

use thiserror::Error;

/// Unordered node pair. Canonical form has `0 <= u < v`.
pub type Pair = (usize, usize);

/// Orders a pair so that the smaller id comes first.
#[inline]
pub fn canonical(pair: Pair) -> Pair {
    if pair.0 <= pair.1 {
        pair
    } else {
        (pair.1, pair.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("node id {node} out of range for {node_count} nodes")]
    NodeOutOfRange { node: usize, node_count: usize },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("cannot sample {requested} negative pairs: only {available} non-edges exist")]
    Capacity { requested: usize, available: usize },
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for GraphError {
    fn from(e: std::io::Error) -> Self {
        GraphError::Io(e.to_string())
    }
}

/// Undirected simple graph.
///
/// Edges are stored once in canonical `(u, v)` form with `u < v`, sorted
/// lexicographically. Adjacency lists are sorted and symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edges: Vec<Pair>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge iterator. Reversed and repeated
    /// edges collapse to one.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = Pair>,
    {
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for node in [u, v] {
                if node >= node_count {
                    return Err(GraphError::NodeOutOfRange { node, node_count });
                }
            }
            canon.push(canonical((u, v)));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut adjacency = vec![Vec::new(); node_count];
        for &(u, v) in &canon {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            node_count,
            edges: canon,
            adjacency,
        })
    }

    pub fn empty(node_count: usize) -> Self {
        Self {
            node_count,
            edges: Vec::new(),
            adjacency: vec![Vec::new(); node_count],
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical edges in sorted order.
    pub fn edges(&self) -> &[Pair] {
        &self.edges
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        if u >= self.node_count || v >= self.node_count {
            return false;
        }
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Number of unordered non-adjacent distinct pairs.
    pub fn non_edge_count(&self) -> usize {
        let n = self.node_count;
        n * n.saturating_sub(1) / 2 - self.edges.len()
    }

    /// Errors unless both endpoints are valid node ids.
    pub fn check_pair(&self, pair: Pair) -> Result<(), GraphError> {
        for node in [pair.0, pair.1] {
            if node >= self.node_count {
                return Err(GraphError::NodeOutOfRange {
                    node,
                    node_count: self.node_count,
                });
            }
        }
        Ok(())
    }
}
