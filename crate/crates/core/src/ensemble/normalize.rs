//! Per-column score normalization.
//!
//! Base models emit scores on unrelated scales (probabilities, neighbor
//! counts, logits), so columns are mapped to a common scale before blending.

use std::fmt;
use std::str::FromStr;

use super::EnsembleError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    None,
    MinMax,
    ZScore,
    #[default]
    Rank,
}

impl Normalization {
    pub const ALL: [Normalization; 4] = [
        Normalization::None,
        Normalization::MinMax,
        Normalization::ZScore,
        Normalization::Rank,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Normalization::None => "none",
            Normalization::MinMax => "minmax",
            Normalization::ZScore => "zscore",
            Normalization::Rank => "rank",
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Normalization {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Normalization::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                EnsembleError::Argument(format!(
                    "unknown normalization {s:?} (expected none, minmax, zscore or rank)"
                ))
            })
    }
}

/// A normalization with its parameters estimated on one column.
///
/// Min/max and mean/std are frozen at fit time so they can be reapplied to a
/// different split. Rank normalization has no parameters and is always
/// recomputed within the column it is applied to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FittedNormalizer {
    Identity,
    MinMax { min: f64, max: f64 },
    ZScore { mean: f64, std: f64 },
    Rank,
}

fn check_column(scores: &[f64]) -> Result<(), EnsembleError> {
    if scores.is_empty() {
        return Err(EnsembleError::Argument(
            "cannot normalize an empty column".into(),
        ));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EnsembleError::Argument(format!(
            "score {i} is not finite ({})",
            scores[i]
        )));
    }
    Ok(())
}

impl FittedNormalizer {
    pub fn fit(method: Normalization, scores: &[f64]) -> Result<Self, EnsembleError> {
        check_column(scores)?;
        Ok(match method {
            Normalization::None => FittedNormalizer::Identity,
            Normalization::Rank => FittedNormalizer::Rank,
            Normalization::MinMax => {
                let min = scores.iter().copied().fold(f64::INFINITY, f64::min);
                let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                FittedNormalizer::MinMax { min, max }
            }
            Normalization::ZScore => {
                let n = scores.len() as f64;
                let mean = scores.iter().sum::<f64>() / n;
                let var = scores.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
                FittedNormalizer::ZScore {
                    mean,
                    std: var.sqrt(),
                }
            }
        })
    }

    pub fn apply(&self, scores: &[f64]) -> Result<Vec<f64>, EnsembleError> {
        check_column(scores)?;
        Ok(match *self {
            FittedNormalizer::Identity => scores.to_vec(),
            FittedNormalizer::MinMax { min, max } => {
                if max > min {
                    let span = max - min;
                    scores.iter().map(|x| (x - min) / span).collect()
                } else {
                    vec![0.5; scores.len()]
                }
            }
            FittedNormalizer::ZScore { mean, std } => {
                if std > 0.0 {
                    scores.iter().map(|x| (x - mean) / std).collect()
                } else {
                    vec![0.0; scores.len()]
                }
            }
            FittedNormalizer::Rank => rank_scaled(scores),
        })
    }
}

/// Average ranks (0-based, ties share the mean rank) divided by `n - 1`.
fn rank_scaled(scores: &[f64]) -> Vec<f64> {
    let n = scores.len();
    if n == 1 {
        return vec![0.5];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut out = vec![0.0; n];
    let denom = (n - 1) as f64;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        // -0.0 and 0.0 tie.
        while end < n && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Mean of ranks start..end, exact in f64 for any practical n.
        let avg = (start + end - 1) as f64 / 2.0;
        for &idx in &order[start..end] {
            out[idx] = avg / denom;
        }
        start = end;
    }
    out
}

/// Fits `method` on `scores` and applies it to the same column.
pub fn normalize_column(scores: &[f64], method: Normalization) -> Result<Vec<f64>, EnsembleError> {
    FittedNormalizer::fit(method, scores)?.apply(scores)
}
