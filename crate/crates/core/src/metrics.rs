//! Ranking metrics for link prediction.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("invalid argument: {0}")]
    Argument(String),
}

/// A metric value together with the sizes it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub metric_name: String,
    pub value: f64,
    /// Cutoff for Hits@K; `None` for metrics without one.
    pub k: Option<usize>,
    pub n_pos: usize,
    pub n_neg: usize,
}

fn check_finite(name: &str, scores: &[f64]) -> Result<(), MetricError> {
    match scores.iter().position(|s| !s.is_finite()) {
        Some(i) => Err(MetricError::Argument(format!(
            "{name}[{i}] is not finite ({})",
            scores[i]
        ))),
        None => Ok(()),
    }
}

/// Hits@K as computed by the OGB link-prediction evaluator.
///
/// The threshold is the `k`-th highest negative score; a positive counts as
/// a hit only when it is strictly greater than the threshold.
pub fn hits_at_k(pos: &[f64], neg: &[f64], k: usize) -> Result<EvalResult, MetricError> {
    if pos.is_empty() {
        return Err(MetricError::Argument("no positive scores".into()));
    }
    if k == 0 {
        return Err(MetricError::Argument("k must be at least 1".into()));
    }
    if neg.len() < k {
        return Err(MetricError::Argument(format!(
            "Hits@{k} needs at least {k} negative scores, got {}",
            neg.len()
        )));
    }
    check_finite("pos", pos)?;
    check_finite("neg", neg)?;

    let mut sorted = neg.to_vec();
    let (_, kth, _) = sorted.select_nth_unstable_by(k - 1, |a, b| b.total_cmp(a));
    let threshold = *kth;
    let hits = pos.iter().filter(|&&p| p > threshold).count();
    Ok(EvalResult {
        metric_name: format!("hits@{k}"),
        value: hits as f64 / pos.len() as f64,
        k: Some(k),
        n_pos: pos.len(),
        n_neg: neg.len(),
    })
}

/// Area under the ROC curve: the probability that a random positive outscores
/// a random negative, with ties counted as one half.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<EvalResult, MetricError> {
    if pos.is_empty() || neg.is_empty() {
        return Err(MetricError::Argument(
            "AUC needs at least one positive and one negative score".into(),
        ));
    }
    check_finite("pos", pos)?;
    check_finite("neg", neg)?;

    let mut neg_sorted = neg.to_vec();
    neg_sorted.sort_unstable_by(f64::total_cmp);
    // Twice the win count: 2 per strict win, 1 per tie. Kept integral so the
    // result is exact.
    let mut doubled: u64 = 0;
    for &p in pos {
        let below = neg_sorted.partition_point(|&n| n < p);
        let not_above = neg_sorted.partition_point(|&n| n <= p);
        doubled += 2 * below as u64 + (not_above - below) as u64;
    }
    let total = pos.len() as f64 * neg.len() as f64;
    Ok(EvalResult {
        metric_name: "auc".into(),
        value: doubled as f64 / 2.0 / total,
        k: None,
        n_pos: pos.len(),
        n_neg: neg.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hits_example() {
        let r = hits_at_k(&[0.9, 0.5, 0.2], &[0.8, 0.4, 0.3, 0.1], 2).unwrap();
        assert_eq!(r.value, 2.0 / 3.0);
        assert_eq!(r.k, Some(2));
        assert_eq!((r.n_pos, r.n_neg), (3, 4));
    }

    #[test]
    fn perfect_separation() {
        let pos = [5.0, 6.0, 7.5];
        let neg = [1.0, 2.0, 4.9, -3.0];
        for k in 1..=4 {
            assert_eq!(hits_at_k(&pos, &neg, k).unwrap().value, 1.0);
        }
        assert_eq!(auc(&pos, &neg).unwrap().value, 1.0);
    }

    #[test]
    fn ties_with_threshold_miss() {
        assert_eq!(hits_at_k(&[0.4], &[0.4, 0.1], 1).unwrap().value, 0.0);
    }

    #[test]
    fn hits_argument_errors() {
        assert!(hits_at_k(&[0.5], &[0.1], 2).is_err());
        assert!(hits_at_k(&[], &[0.1], 1).is_err());
        assert!(hits_at_k(&[0.5], &[0.1], 0).is_err());
        assert!(hits_at_k(&[f64::NAN], &[0.1], 1).is_err());
        assert!(hits_at_k(&[0.5], &[f64::INFINITY], 1).is_err());
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[1.0], &[0.0]).unwrap().value, 1.0);
        assert_eq!(auc(&[0.5], &[0.5]).unwrap().value, 0.5);
        assert_eq!(auc(&[0.9, 0.2], &[0.5]).unwrap().value, 0.5);
        assert!(auc(&[], &[0.5]).is_err());
        assert!(auc(&[0.5], &[]).is_err());
        assert!(auc(&[0.5], &[f64::NAN]).is_err());
    }
}
