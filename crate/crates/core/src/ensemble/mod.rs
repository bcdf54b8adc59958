//! Weighted blending of per-model score columns.
//!
//! A blend assigns every row the convex combination `Σ_k w_k · s_k` of its
//! (normalized) model scores, with `w` on the probability simplex. Two
//! objectives score a weight vector on a validation table: Hits@K of the
//! blended positives against the blended negatives, or the plain mean of the
//! blended positive scores.

mod normalize;
mod table;

pub use normalize::{normalize_column, FittedNormalizer, Normalization};
pub use table::ScoreTable;

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::metrics::{self, MetricError};

/// Allowed deviation of a weight sum from 1.
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EnsembleError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid score table: {0}")]
    Table(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("model names differ: table has {expected:?}, weights have {found:?}")]
    NameMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("weights violate the simplex: {0}")]
    Simplex(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("i/o: {0}")]
    Io(String),
}

/// Blend coefficients: nonnegative and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, EnsembleError> {
        if weights.is_empty() {
            return Err(EnsembleError::Simplex("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(EnsembleError::Simplex(format!("weight {w} is not >= 0")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(EnsembleError::Simplex(format!("weights sum to {sum}")));
        }
        Ok(Self(weights))
    }

    /// Uniform weights `1/k`.
    pub fn uniform(k: usize) -> Self {
        assert!(k > 0, "uniform weights need at least one model");
        Self(vec![1.0 / k as f64; k])
    }

    /// One-hot weights selecting `model`.
    pub fn vertex(k: usize, model: usize) -> Self {
        assert!(model < k);
        let mut w = vec![0.0; k];
        w[model] = 1.0;
        Self(w)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Maps a point of the unit box onto the simplex by dividing by its sum;
/// the all-zero point maps to uniform weights.
pub fn project_to_simplex(raw: &[f64]) -> Result<WeightVector, EnsembleError> {
    if raw.is_empty() {
        return Err(EnsembleError::Argument("empty raw weight vector".into()));
    }
    if let Some(x) = raw.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(EnsembleError::Argument(format!(
            "raw weight {x} outside [0, 1]"
        )));
    }
    let sum: f64 = raw.iter().sum();
    if sum > 0.0 {
        Ok(WeightVector(raw.iter().map(|x| x / sum).collect()))
    } else {
        Ok(WeightVector::uniform(raw.len()))
    }
}

/// Row-wise weighted sum of the table's columns.
///
/// Zero-weight columns are skipped, so a vertex weight vector reproduces its
/// column bit for bit.
pub fn combine(table: &ScoreTable, weights: &WeightVector) -> Result<Vec<f64>, EnsembleError> {
    if weights.len() != table.model_count() {
        return Err(EnsembleError::Argument(format!(
            "{} weights for {} models",
            weights.len(),
            table.model_count()
        )));
    }
    let mut out: Option<Vec<f64>> = None;
    for (col, &w) in table.columns().iter().zip(weights.as_slice()) {
        if w == 0.0 {
            continue;
        }
        match out.as_mut() {
            None => out = Some(col.iter().map(|s| w * s).collect()),
            Some(acc) => {
                for (a, s) in acc.iter_mut().zip(col) {
                    *a += w * s;
                }
            }
        }
    }
    Ok(out.unwrap_or_else(|| vec![0.0; table.len()]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveMode {
    /// Hits@K of blended positives against blended negatives.
    #[default]
    Hits,
    /// Mean blended score over positive rows.
    PosMean,
}

impl ObjectiveMode {
    pub fn name(self) -> &'static str {
        match self {
            ObjectiveMode::Hits => "hits",
            ObjectiveMode::PosMean => "pos-mean",
        }
    }
}

impl fmt::Display for ObjectiveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ObjectiveMode {
    type Err = EnsembleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hits" => Ok(ObjectiveMode::Hits),
            "pos-mean" | "pos_mean" => Ok(ObjectiveMode::PosMean),
            other => Err(EnsembleError::Argument(format!(
                "unknown objective {other:?} (expected hits or pos-mean)"
            ))),
        }
    }
}

/// Scores a weight vector on a (validation) table.
pub fn objective(
    table: &ScoreTable,
    weights: &WeightVector,
    mode: ObjectiveMode,
    k: usize,
) -> Result<f64, EnsembleError> {
    if table.positive_count() == 0 {
        return Err(EnsembleError::Argument("table has no positive rows".into()));
    }
    let blended = combine(table, weights)?;
    let (pos, neg) = table.split_by_label(&blended);
    match mode {
        ObjectiveMode::Hits => Ok(metrics::hits_at_k(&pos, &neg, k)?.value),
        ObjectiveMode::PosMean => Ok(pos.iter().sum::<f64>() / pos.len() as f64),
    }
}

/// Uniform weights over the table's models.
pub fn average_baseline(table: &ScoreTable) -> WeightVector {
    WeightVector::uniform(table.model_count())
}

/// Writes `name<TAB>weight` lines.
pub fn write_weights<W: Write>(
    mut w: W,
    names: &[String],
    weights: &WeightVector,
) -> std::io::Result<()> {
    for (name, x) in names.iter().zip(weights.as_slice()) {
        writeln!(w, "{name}\t{x:?}")?;
    }
    w.flush()
}

/// Reads a weights file; the weights must already lie on the simplex.
pub fn read_weights<R: BufRead>(r: R) -> Result<(Vec<String>, WeightVector), EnsembleError> {
    let mut names = Vec::new();
    let mut weights = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line.map_err(|e| EnsembleError::Io(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| EnsembleError::Parse {
            line: idx + 1,
            message,
        };
        let (name, value) = line
            .split_once('\t')
            .ok_or_else(|| parse_err("expected name<TAB>weight".into()))?;
        if names.iter().any(|n| n == name) {
            return Err(parse_err(format!("duplicate model name {name:?}")));
        }
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("invalid weight {value:?}")))?;
        names.push(name.to_string());
        weights.push(value);
    }
    Ok((names, WeightVector::new(weights)?))
}
