use std::collections::HashSet;

use rand::Rng;

use super::{canonical, Graph, GraphError, Pair};
use crate::rng::{self, Pcg64, Stream};

/// Positive edges partitioned into train/valid/test plus sampled negatives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSplit {
    pub node_count: usize,
    pub train_pos: Vec<Pair>,
    pub valid_pos: Vec<Pair>,
    pub valid_neg: Vec<Pair>,
    pub test_pos: Vec<Pair>,
    pub test_neg: Vec<Pair>,
}

impl LinkSplit {
    /// The graph seen by predictors: training edges only.
    pub fn train_graph(&self) -> Graph {
        Graph::from_edges(self.node_count, self.train_pos.iter().copied())
            .expect("split edges come from a valid graph")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConfig {
    pub valid_frac: f64,
    pub test_frac: f64,
    pub n_valid_neg: usize,
    pub n_test_neg: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            valid_frac: 0.1,
            test_frac: 0.1,
            n_valid_neg: 500,
            n_test_neg: 500,
        }
    }
}

#[inline]
fn index_below(rng: &mut Pcg64, bound: usize) -> usize {
    rng.gen_range(0..bound as u64) as usize
}

/// Splits the edges of `graph` and samples validation/test negatives.
///
/// Positives are shuffled once; the first `round(valid_frac·|E|)` go to
/// validation, the next `round(test_frac·|E|)` to test, the rest to train.
/// Negatives are drawn jointly without replacement from the non-edges of the
/// full graph, so the validation and test negatives never overlap. Each list
/// is returned sorted.
pub fn make_split(graph: &Graph, cfg: &SplitConfig, seed: u64) -> Result<LinkSplit, GraphError> {
    for (name, frac) in [("valid_frac", cfg.valid_frac), ("test_frac", cfg.test_frac)] {
        if !(frac > 0.0 && frac < 1.0) {
            return Err(GraphError::Argument(format!(
                "{name} must lie in (0, 1), got {frac}"
            )));
        }
    }
    if cfg.valid_frac + cfg.test_frac >= 1.0 {
        return Err(GraphError::Argument(format!(
            "valid_frac + test_frac must be < 1, got {}",
            cfg.valid_frac + cfg.test_frac
        )));
    }
    let requested = cfg.n_valid_neg + cfg.n_test_neg;
    let available = graph.non_edge_count();
    if requested > available {
        return Err(GraphError::Capacity {
            requested,
            available,
        });
    }

    let mut rng = rng::stream(seed, Stream::Split);
    let m = graph.edge_count();
    let n_valid = (cfg.valid_frac * m as f64).round() as usize;
    let n_test = (cfg.test_frac * m as f64).round() as usize;
    if n_valid + n_test > m {
        return Err(GraphError::Argument(format!(
            "fractions select {} of {m} edges",
            n_valid + n_test
        )));
    }

    let mut edges = graph.edges().to_vec();
    shuffle(&mut edges, &mut rng);
    let mut valid_pos = edges[..n_valid].to_vec();
    let mut test_pos = edges[n_valid..n_valid + n_test].to_vec();
    let mut train_pos = edges[n_valid + n_test..].to_vec();

    let negatives = sample_non_edges(graph, requested, &mut rng)?;
    let mut valid_neg = negatives[..cfg.n_valid_neg].to_vec();
    let mut test_neg = negatives[cfg.n_valid_neg..].to_vec();

    for list in [
        &mut train_pos,
        &mut valid_pos,
        &mut test_pos,
        &mut valid_neg,
        &mut test_neg,
    ] {
        list.sort_unstable();
    }
    Ok(LinkSplit {
        node_count: graph.node_count(),
        train_pos,
        valid_pos,
        valid_neg,
        test_pos,
        test_neg,
    })
}

fn shuffle<T>(items: &mut [T], rng: &mut Pcg64) {
    for i in (1..items.len()).rev() {
        let j = index_below(rng, i + 1);
        items.swap(i, j);
    }
}

/// Draws `count` distinct canonical non-edges of `graph`, uniformly without
/// replacement, in draw order.
///
/// Uses rejection from uniform pairs while the request is at most a quarter
/// of the available non-edges, and explicit enumeration with a partial
/// Fisher-Yates shuffle beyond that.
pub fn sample_non_edges(
    graph: &Graph,
    count: usize,
    rng: &mut Pcg64,
) -> Result<Vec<Pair>, GraphError> {
    let available = graph.non_edge_count();
    if count > available {
        return Err(GraphError::Capacity {
            requested: count,
            available,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = graph.node_count();
    if count * 4 <= available {
        let mut seen = HashSet::with_capacity(count);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let u = index_below(rng, n);
            let v = index_below(rng, n);
            if u == v || graph.has_edge(u, v) {
                continue;
            }
            let pair = canonical((u, v));
            if seen.insert(pair) {
                out.push(pair);
            }
        }
        Ok(out)
    } else {
        let mut pool = Vec::with_capacity(available);
        for u in 0..n {
            let mut nbrs = graph.neighbors(u).iter().peekable();
            for v in (u + 1)..n {
                while nbrs.next_if(|&&w| w < v).is_some() {}
                if nbrs.next_if_eq(&&v).is_none() {
                    pool.push((u, v));
                }
            }
        }
        debug_assert_eq!(pool.len(), available);
        for i in 0..count {
            let j = i + index_below(rng, pool.len() - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        Ok(pool)
    }
}
