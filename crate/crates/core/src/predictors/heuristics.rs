//! Closed-form neighborhood scores.

use std::fmt;
use std::str::FromStr;

use super::PredictError;
use crate::graph::{Graph, Pair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeuristicKind {
    CommonNeighbors,
    AdamicAdar,
    ResourceAllocation,
    Jaccard,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; 4] = [
        HeuristicKind::CommonNeighbors,
        HeuristicKind::AdamicAdar,
        HeuristicKind::ResourceAllocation,
        HeuristicKind::Jaccard,
    ];

    pub fn name(self) -> &'static str {
        match self {
            HeuristicKind::CommonNeighbors => "common_neighbors",
            HeuristicKind::AdamicAdar => "adamic_adar",
            HeuristicKind::ResourceAllocation => "resource_allocation",
            HeuristicKind::Jaccard => "jaccard",
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = PredictError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        HeuristicKind::ALL
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| PredictError::Argument(format!("unknown heuristic {s:?}")))
    }
}

/// Walks two sorted neighbor lists and calls `f` on every shared node.
fn for_each_common(a: &[usize], b: &[usize], mut f: impl FnMut(usize)) {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                f(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

pub fn heuristic_score(
    graph: &Graph,
    pair: Pair,
    kind: HeuristicKind,
) -> Result<f64, PredictError> {
    graph.check_pair(pair)?;
    let (a, b) = (graph.neighbors(pair.0), graph.neighbors(pair.1));
    let score = match kind {
        HeuristicKind::CommonNeighbors => {
            let mut count = 0usize;
            for_each_common(a, b, |_| count += 1);
            count as f64
        }
        HeuristicKind::AdamicAdar => {
            let mut sum = 0.0;
            for_each_common(a, b, |z| {
                let deg = graph.degree(z);
                if deg > 1 {
                    sum += 1.0 / (deg as f64).ln();
                }
            });
            sum
        }
        HeuristicKind::ResourceAllocation => {
            let mut sum = 0.0;
            for_each_common(a, b, |z| sum += 1.0 / graph.degree(z) as f64);
            sum
        }
        HeuristicKind::Jaccard => {
            let mut common = 0usize;
            for_each_common(a, b, |_| common += 1);
            let union = a.len() + b.len() - common;
            if union == 0 {
                0.0
            } else {
                common as f64 / union as f64
            }
        }
    };
    Ok(score)
}
