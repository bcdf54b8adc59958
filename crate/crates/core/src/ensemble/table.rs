//! Score tables and their TSV form.
//!
//! ```text
//! src<TAB>dst<TAB>label<TAB><model_1>...<TAB><model_K>
//! 0<TAB>5<TAB>1<TAB>0.93<TAB>...
//! ```
//!
//! Scores are written with Rust's shortest round-trip float formatting, so a
//! write followed by a read reproduces every value bit for bit.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use super::normalize::{FittedNormalizer, Normalization};
use super::EnsembleError;
use crate::graph::Pair;

/// Per-model scores over a shared list of labelled node pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    model_names: Vec<String>,
    pairs: Vec<Pair>,
    labels: Vec<bool>,
    columns: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn new(
        model_names: Vec<String>,
        pairs: Vec<Pair>,
        labels: Vec<bool>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self, EnsembleError> {
        if model_names.is_empty() {
            return Err(EnsembleError::Table("no model columns".into()));
        }
        if model_names.len() != columns.len() {
            return Err(EnsembleError::Table(format!(
                "{} model names for {} columns",
                model_names.len(),
                columns.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &model_names {
            if name.is_empty() || name.contains(['\t', '\n', '\r']) {
                return Err(EnsembleError::Table(format!("invalid model name {name:?}")));
            }
            if !seen.insert(name.as_str()) {
                return Err(EnsembleError::Table(format!(
                    "duplicate model name {name:?}"
                )));
            }
        }
        if labels.len() != pairs.len() {
            return Err(EnsembleError::Table(format!(
                "{} labels for {} pairs",
                labels.len(),
                pairs.len()
            )));
        }
        for (name, col) in model_names.iter().zip(&columns) {
            if col.len() != pairs.len() {
                return Err(EnsembleError::Table(format!(
                    "column {name:?} has {} scores for {} pairs",
                    col.len(),
                    pairs.len()
                )));
            }
            if let Some(i) = col.iter().position(|s| !s.is_finite()) {
                return Err(EnsembleError::Table(format!(
                    "column {name:?} row {i} is not finite"
                )));
            }
        }
        Ok(Self {
            model_names,
            pairs,
            labels,
            columns,
        })
    }

    /// Builds a table from positive pairs followed by negative pairs.
    pub fn from_pos_neg(
        model_names: Vec<String>,
        pos: &[Pair],
        neg: &[Pair],
        columns: Vec<Vec<f64>>,
    ) -> Result<Self, EnsembleError> {
        let pairs: Vec<Pair> = pos.iter().chain(neg).copied().collect();
        let labels = std::iter::repeat_n(true, pos.len())
            .chain(std::iter::repeat_n(false, neg.len()))
            .collect();
        Self::new(model_names, pairs, labels, columns)
    }

    pub fn model_names(&self) -> &[String] {
        &self.model_names
    }

    pub fn model_count(&self) -> usize {
        self.model_names.len()
    }

    pub fn pairs(&self) -> &[Pair] {
        &self.pairs
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, model: usize) -> &[f64] {
        &self.columns[model]
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.model_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn positive_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }

    pub fn negative_count(&self) -> usize {
        self.labels.len() - self.positive_count()
    }

    /// Splits any row-aligned values into (positive rows, negative rows).
    pub fn split_by_label(&self, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut pos = Vec::with_capacity(self.positive_count());
        let mut neg = Vec::with_capacity(self.negative_count());
        for (&v, &label) in values.iter().zip(&self.labels) {
            if label {
                pos.push(v);
            } else {
                neg.push(v);
            }
        }
        (pos, neg)
    }

    /// Fits one normalizer per column on this table.
    pub fn fit_normalizers(
        &self,
        method: Normalization,
    ) -> Result<Vec<FittedNormalizer>, EnsembleError> {
        self.columns
            .iter()
            .map(|col| FittedNormalizer::fit(method, col))
            .collect()
    }

    /// Returns a copy with every column passed through its normalizer.
    pub fn normalized(&self, fitted: &[FittedNormalizer]) -> Result<Self, EnsembleError> {
        if fitted.len() != self.columns.len() {
            return Err(EnsembleError::Argument(format!(
                "{} normalizers for {} columns",
                fitted.len(),
                self.columns.len()
            )));
        }
        let columns = self
            .columns
            .iter()
            .zip(fitted)
            .map(|(col, f)| f.apply(col))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            columns,
            ..self.clone()
        })
    }

    /// Reorders columns to follow `names`, which must be a permutation of
    /// the current model names.
    pub fn reordered(&self, names: &[String]) -> Result<Self, EnsembleError> {
        let mut mine: Vec<&String> = self.model_names.iter().collect();
        let mut theirs: Vec<&String> = names.iter().collect();
        mine.sort();
        theirs.sort();
        if mine != theirs {
            return Err(EnsembleError::NameMismatch {
                expected: self.model_names.clone(),
                found: names.to_vec(),
            });
        }
        let columns = names
            .iter()
            .map(|n| self.column_by_name(n).expect("checked above").to_vec())
            .collect();
        Ok(Self {
            model_names: names.to_vec(),
            columns,
            ..self.clone()
        })
    }

    pub fn write_tsv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "src\tdst\tlabel")?;
        for name in &self.model_names {
            write!(w, "\t{name}")?;
        }
        writeln!(w)?;
        for (row, (&(u, v), &label)) in self.pairs.iter().zip(&self.labels).enumerate() {
            write!(w, "{u}\t{v}\t{}", u8::from(label))?;
            for col in &self.columns {
                write!(w, "\t{:?}", col[row])?;
            }
            writeln!(w)?;
        }
        w.flush()
    }

    /// Parses the TSV form. Errors carry the 1-based line number.
    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self, EnsembleError> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| EnsembleError::Io(e.to_string()))?,
            None => return Err(parse_err(1, "empty score table")),
        };
        let fields: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
        if fields.len() < 4 || fields[..3] != ["src", "dst", "label"] {
            return Err(parse_err(
                1,
                "header must be src, dst, label followed by at least one model column",
            ));
        }
        let model_names: Vec<String> = fields[3..].iter().map(|s| s.to_string()).collect();
        let mut seen = HashSet::new();
        for name in &model_names {
            if name.is_empty() {
                return Err(parse_err(1, "empty model name"));
            }
            if !seen.insert(name.as_str()) {
                return Err(parse_err(1, &format!("duplicate model name {name:?}")));
            }
        }

        let k = model_names.len();
        let mut pairs = Vec::new();
        let mut labels = Vec::new();
        let mut columns = vec![Vec::new(); k];
        for (idx, line) in lines {
            let line_no = idx + 1;
            let line = line.map_err(|e| EnsembleError::Io(e.to_string()))?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split('\t').collect();
            if cells.len() != k + 3 {
                return Err(parse_err(
                    line_no,
                    &format!("expected {} fields, found {}", k + 3, cells.len()),
                ));
            }
            let node = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(line_no, &format!("invalid node id {s:?}")))
            };
            pairs.push((node(cells[0])?, node(cells[1])?));
            labels.push(match cells[2] {
                "1" => true,
                "0" => false,
                other => {
                    return Err(parse_err(
                        line_no,
                        &format!("label must be 0 or 1, got {other:?}"),
                    ))
                }
            });
            for (col, cell) in columns.iter_mut().zip(&cells[3..]) {
                let value: f64 = cell
                    .parse()
                    .map_err(|_| parse_err(line_no, &format!("invalid score {cell:?}")))?;
                if !value.is_finite() {
                    return Err(parse_err(line_no, &format!("score {cell:?} is not finite")));
                }
                col.push(value);
            }
        }
        Self::new(model_names, pairs, labels, columns)
    }
}

fn parse_err(line: usize, message: &str) -> EnsembleError {
    EnsembleError::Parse {
        line,
        message: message.to_string(),
    }
}
