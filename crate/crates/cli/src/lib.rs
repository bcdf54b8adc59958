//! Pipeline behind the `linkens` binary: split a graph, score held-out pairs
//! with base predictors, search blend weights, evaluate and ablate.
//!
//! Every command is a plain function over paths and a [`RunConfig`], so the
//! binary only parses arguments and prints.

pub mod config;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use linkens_core::ensemble::{
    self, combine, objective, read_weights, write_weights, ObjectiveMode, ScoreTable, WeightVector,
};
use linkens_core::graph::{
    make_split, read_edge_list, read_pairs, synthetic_graph, write_edge_list, write_pairs, Graph,
    LinkSplit, Pair, SyntheticKind,
};
use linkens_core::metrics::{auc, hits_at_k};
use linkens_core::predictors::{score_column, GnnScorer, HeuristicKind, Predictor};
use linkens_core::tpe::{optimize, write_trials, OptimizeResult};

pub use config::RunConfig;

pub const TRAIN_POS: &str = "train_pos.tsv";
pub const VALID_POS: &str = "valid_pos.tsv";
pub const VALID_NEG: &str = "valid_neg.tsv";
pub const TEST_POS: &str = "test_pos.tsv";
pub const TEST_NEG: &str = "test_neg.tsv";
pub const VALID_SCORES: &str = "valid_scores.tsv";
pub const TEST_SCORES: &str = "test_scores.tsv";
pub const WEIGHTS: &str = "weights.tsv";
pub const TRIALS: &str = "trials.tsv";
pub const EDGES: &str = "edges.tsv";

/// Name of the trainable predictor; every other name is a heuristic.
pub const GNN: &str = "gnn";

fn open(path: &Path) -> Result<BufReader<File>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(file))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|()| w.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create directory {}", dir.display()))
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    read_edge_list(open(path)?).with_context(|| format!("reading edge list {}", path.display()))
}

pub fn read_score_table(path: &Path) -> Result<ScoreTable> {
    ScoreTable::read_tsv(open(path)?)
        .with_context(|| format!("reading score table {}", path.display()))
}

fn write_score_table(path: &Path, table: &ScoreTable) -> Result<()> {
    write_file(path, |w| table.write_tsv(w))
}

/// Writes the five split files, each with a `#N=` header.
pub fn write_split(dir: &Path, split: &LinkSplit) -> Result<()> {
    create_dir(dir)?;
    for (name, pairs) in [
        (TRAIN_POS, &split.train_pos),
        (VALID_POS, &split.valid_pos),
        (VALID_NEG, &split.valid_neg),
        (TEST_POS, &split.test_pos),
        (TEST_NEG, &split.test_neg),
    ] {
        write_file(&dir.join(name), |w| write_pairs(w, split.node_count, pairs))?;
    }
    Ok(())
}

/// Reads the five split files back. The node count is the largest `#N=`
/// header (or implied id) across files.
pub fn read_split(dir: &Path) -> Result<LinkSplit> {
    let mut node_count = 0;
    let mut lists: Vec<Vec<Pair>> = Vec::new();
    for name in [TRAIN_POS, VALID_POS, VALID_NEG, TEST_POS, TEST_NEG] {
        let path = dir.join(name);
        let list =
            read_pairs(open(&path)?).with_context(|| format!("reading {}", path.display()))?;
        let implied = list
            .pairs
            .iter()
            .map(|&(u, v)| u.max(v) + 1)
            .max()
            .unwrap_or(0);
        node_count = node_count.max(list.node_count.unwrap_or(0)).max(implied);
        lists.push(list.pairs);
    }
    let mut lists = lists.into_iter();
    let mut next = || lists.next().expect("five lists");
    Ok(LinkSplit {
        node_count,
        train_pos: next(),
        valid_pos: next(),
        valid_neg: next(),
        test_pos: next(),
        test_neg: next(),
    })
}

/// `split`: partitions an edge list and samples negatives.
pub fn cmd_split(edge_file: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<LinkSplit> {
    let graph = read_graph(edge_file)?;
    let split = make_split(&graph, &cfg.split, cfg.seed)?;
    write_split(out_dir, &split)?;
    Ok(split)
}

fn predictor_names() -> Vec<&'static str> {
    HeuristicKind::ALL
        .iter()
        .map(|k| k.name())
        .chain([GNN])
        .collect()
}

fn check_predictors(names: &[String]) -> Result<()> {
    ensure!(!names.is_empty(), "no predictors requested");
    let valid = predictor_names();
    for (i, name) in names.iter().enumerate() {
        if !valid.contains(&name.as_str()) {
            bail!(
                "unknown predictor {name:?} (valid names: {})",
                valid.join(", ")
            );
        }
        if names[..i].contains(name) {
            bail!("predictor {name:?} requested twice");
        }
    }
    Ok(())
}

/// Scores the validation and test pairs of `split` with every configured
/// predictor, using the training graph only. The GNN is trained first.
pub fn score_split(split: &LinkSplit, cfg: &RunConfig) -> Result<(ScoreTable, ScoreTable)> {
    check_predictors(&cfg.predictors)?;
    let graph = split.train_graph();
    let gnn = if cfg.predictors.iter().any(|n| n == GNN) {
        let mut model = GnnScorer::init(graph.node_count(), &cfg.gnn, cfg.seed)?;
        model
            .train(&graph, &split.train_pos, &cfg.train_config())
            .context("training the gnn predictor")?;
        Some(model)
    } else {
        None
    };
    let score = |pos: &[Pair], neg: &[Pair]| -> Result<ScoreTable> {
        let pairs: Vec<Pair> = pos.iter().chain(neg).copied().collect();
        let columns = cfg
            .predictors
            .iter()
            .map(|name| {
                let predictor = match name.as_str() {
                    GNN => Predictor::Gnn(gnn.as_ref().expect("trained above")),
                    other => Predictor::Heuristic(other.parse()?),
                };
                Ok(score_column(predictor, &graph, &pairs)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ScoreTable::from_pos_neg(
            cfg.predictors.clone(),
            pos,
            neg,
            columns,
        )?)
    };
    Ok((
        score(&split.valid_pos, &split.valid_neg)?,
        score(&split.test_pos, &split.test_neg)?,
    ))
}

/// `score`: writes validation and test score tables for a split directory.
pub fn cmd_score(
    split_dir: &Path,
    out_dir: &Path,
    cfg: &RunConfig,
) -> Result<(ScoreTable, ScoreTable)> {
    check_predictors(&cfg.predictors)?;
    let split = read_split(split_dir)?;
    let (valid, test) = score_split(&split, cfg)?;
    create_dir(out_dir)?;
    write_score_table(&out_dir.join(VALID_SCORES), &valid)?;
    write_score_table(&out_dir.join(TEST_SCORES), &test)?;
    Ok((valid, test))
}

/// Label of the optimized quantity, e.g. `hits@20`.
pub fn objective_label(cfg: &RunConfig) -> String {
    match cfg.objective {
        ObjectiveMode::Hits => format!("hits@{}", cfg.k),
        ObjectiveMode::PosMean => "pos-mean".into(),
    }
}

/// Applies the configured normalization, fitting it on `fit_on`.
pub fn normalize_with(
    table: &ScoreTable,
    fit_on: &ScoreTable,
    cfg: &RunConfig,
) -> Result<ScoreTable> {
    let fitted = fit_on.fit_normalizers(cfg.normalize)?;
    Ok(table.normalized(&fitted)?)
}

fn check_hits_capacity(table: &ScoreTable, k: usize, what: &str) -> Result<()> {
    ensure!(table.positive_count() > 0, "{what} has no positive rows");
    ensure!(
        table.negative_count() >= k,
        "{what} has {} negative rows, fewer than k = {k}",
        table.negative_count()
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSearch {
    pub model_names: Vec<String>,
    pub result: OptimizeResult,
}

impl WeightSearch {
    pub fn weights(&self) -> &WeightVector {
        &self.result.best.weights
    }

    pub fn best_value(&self) -> f64 {
        self.result.best.value
    }
}

/// Runs the weight search on a validation table (normalized on itself).
pub fn optimize_table(valid: &ScoreTable, cfg: &RunConfig) -> Result<WeightSearch> {
    if cfg.objective == ObjectiveMode::Hits {
        check_hits_capacity(valid, cfg.k, "validation table")?;
    }
    let table = normalize_with(valid, valid, cfg)?;
    // Surface argument errors once; afterwards every evaluation is on the
    // same table and cannot fail.
    objective(
        &table,
        &WeightVector::uniform(table.model_count()),
        cfg.objective,
        cfg.k,
    )?;
    let result = optimize(table.model_count(), &cfg.tpe_config(), |w| {
        objective(&table, w, cfg.objective, cfg.k).unwrap_or(f64::NAN)
    })?;
    Ok(WeightSearch {
        model_names: valid.model_names().to_vec(),
        result,
    })
}

pub fn write_search(out_dir: &Path, search: &WeightSearch) -> Result<()> {
    create_dir(out_dir)?;
    write_file(&out_dir.join(WEIGHTS), |w| {
        write_weights(w, &search.model_names, search.weights())
    })?;
    write_file(&out_dir.join(TRIALS), |w| {
        write_trials(w, &search.model_names, &search.result.history)
    })
}

/// `optimize`: searches weights on a validation score table and writes
/// `weights.tsv` and `trials.tsv`.
pub fn cmd_optimize(valid_scores: &Path, out_dir: &Path, cfg: &RunConfig) -> Result<WeightSearch> {
    let valid = read_score_table(valid_scores)?;
    let search = optimize_table(&valid, cfg)?;
    write_search(out_dir, &search)?;
    Ok(search)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub model: String,
    pub hits: f64,
    pub auc: f64,
}

fn metric_row(model: &str, table: &ScoreTable, values: &[f64], k: usize) -> Result<MetricRow> {
    let (pos, neg) = table.split_by_label(values);
    Ok(MetricRow {
        model: model.to_string(),
        hits: hits_at_k(&pos, &neg, k)?.value,
        auc: auc(&pos, &neg)?.value,
    })
}

/// Hits@K and AUC of the blend, then of each raw model column. The blend is
/// computed on normalized scores, with normalizers fit on `fit_on` (the
/// table itself when `None`).
pub fn evaluate_table(
    table: &ScoreTable,
    names: &[String],
    weights: &WeightVector,
    fit_on: Option<&ScoreTable>,
    cfg: &RunConfig,
) -> Result<Vec<MetricRow>> {
    ensure!(
        names.len() == weights.len(),
        "{} weight names for {} weights",
        names.len(),
        weights.len()
    );
    check_hits_capacity(table, cfg.k, "score table")?;
    let table = table.reordered(names)?;
    let reference = match fit_on {
        Some(other) => other.reordered(names).context("normalization table")?,
        None => table.clone(),
    };
    let blended = combine(&normalize_with(&table, &reference, cfg)?, weights)?;
    let mut rows = vec![metric_row("blend", &table, &blended, cfg.k)?];
    for (i, name) in names.iter().enumerate() {
        rows.push(metric_row(name, &table, table.column(i), cfg.k)?);
    }
    Ok(rows)
}

pub fn format_metric_rows(rows: &[MetricRow], k: usize) -> String {
    let mut out = format!("model\thits@{k}\tauc\n");
    for r in rows {
        writeln!(out, "{}\t{}\t{}", r.model, r.hits, r.auc).expect("writing to a String");
    }
    out
}

/// `evaluate`: reports blend and per-model metrics as TSV.
pub fn cmd_evaluate(
    scores: &Path,
    weights: &Path,
    fit_on: Option<&Path>,
    cfg: &RunConfig,
) -> Result<String> {
    let table = read_score_table(scores)?;
    let (names, w) = read_weights(open(weights)?)
        .with_context(|| format!("reading weights {}", weights.display()))?;
    let reference = fit_on.map(read_score_table).transpose()?;
    let rows = evaluate_table(&table, &names, &w, reference.as_ref(), cfg)?;
    Ok(format_metric_rows(&rows, cfg.k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub method: String,
    pub weights: WeightVector,
    pub valid_hits: f64,
    pub test_hits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ablation {
    pub rows: Vec<AblationRow>,
    pub search: WeightSearch,
}

impl Ablation {
    pub fn averaging(&self) -> &AblationRow {
        &self.rows[0]
    }

    pub fn tpe(&self) -> &AblationRow {
        &self.rows[1]
    }
}

/// Uniform averaging against searched weights, both scored by Hits@K on the
/// validation and test tables. Normalizers are fit on validation.
pub fn ablate_tables(valid: &ScoreTable, test: &ScoreTable, cfg: &RunConfig) -> Result<Ablation> {
    let test = test
        .reordered(valid.model_names())
        .context("test table models differ from validation table")?;
    check_hits_capacity(valid, cfg.k, "validation table")?;
    check_hits_capacity(&test, cfg.k, "test table")?;
    let search = optimize_table(valid, cfg)?;
    let valid_n = normalize_with(valid, valid, cfg)?;
    let test_n = normalize_with(&test, valid, cfg)?;
    let rows = [
        ("averaging", ensemble::average_baseline(valid)),
        ("tpe", search.weights().clone()),
    ]
    .into_iter()
    .map(|(method, weights)| {
        Ok(AblationRow {
            method: method.into(),
            valid_hits: objective(&valid_n, &weights, ObjectiveMode::Hits, cfg.k)?,
            test_hits: objective(&test_n, &weights, ObjectiveMode::Hits, cfg.k)?,
            weights,
        })
    })
    .collect::<Result<Vec<_>>>()?;
    Ok(Ablation { rows, search })
}

pub fn format_ablation(ablation: &Ablation, k: usize) -> String {
    let mut out = format!("method\tvalid_hits@{k}\ttest_hits@{k}\n");
    for r in &ablation.rows {
        writeln!(out, "{}\t{}\t{}", r.method, r.valid_hits, r.test_hits)
            .expect("writing to a String");
    }
    out
}

/// `ablate`: prints the averaging-versus-search comparison.
pub fn cmd_ablate(valid_scores: &Path, test_scores: &Path, cfg: &RunConfig) -> Result<String> {
    let valid = read_score_table(valid_scores)?;
    let test = read_score_table(test_scores)?;
    Ok(format_ablation(&ablate_tables(&valid, &test, cfg)?, cfg.k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoOutcome {
    pub out_dir: PathBuf,
    pub graph: Graph,
    pub ablation: Ablation,
}

impl DemoOutcome {
    pub fn summary(&self, cfg: &RunConfig) -> String {
        let search = &self.ablation.search;
        let mut out = format!(
            "graph: {} nodes, {} edges (block model {:?}, p_in {}, p_out {})\n",
            self.graph.node_count(),
            self.graph.edge_count(),
            cfg.sbm_blocks,
            cfg.sbm_p_in,
            cfg.sbm_p_out
        );
        writeln!(
            out,
            "best validation {}: {} at trial {}",
            objective_label(cfg),
            search.best_value(),
            search.result.best_index
        )
        .expect("writing to a String");
        for (name, w) in search.model_names.iter().zip(search.weights().as_slice()) {
            writeln!(out, "weight {name}: {w}").expect("writing to a String");
        }
        out.push_str(&format_ablation(&self.ablation, cfg.k));
        writeln!(out, "artifacts written to {}", self.out_dir.display())
            .expect("writing to a String");
        out
    }
}

/// `demo`: block-model graph → split → scores → weight search → ablation,
/// writing every intermediate file to `out_dir`.
pub fn cmd_demo(out_dir: &Path, cfg: &RunConfig) -> Result<DemoOutcome> {
    check_predictors(&cfg.predictors)?;
    let graph = synthetic_graph(
        &SyntheticKind::Sbm {
            block_sizes: cfg.sbm_blocks.clone(),
            p_in: cfg.sbm_p_in,
            p_out: cfg.sbm_p_out,
        },
        cfg.seed,
    )?;
    create_dir(out_dir)?;
    write_file(&out_dir.join(EDGES), |w| write_edge_list(w, &graph))?;
    let split = make_split(&graph, &cfg.split, cfg.seed)?;
    write_split(out_dir, &split)?;
    let (valid, test) = score_split(&split, cfg)?;
    write_score_table(&out_dir.join(VALID_SCORES), &valid)?;
    write_score_table(&out_dir.join(TEST_SCORES), &test)?;
    let ablation = ablate_tables(&valid, &test, cfg)?;
    write_search(out_dir, &ablation.search)?;
    Ok(DemoOutcome {
        out_dir: out_dir.to_path_buf(),
        graph,
        ablation,
    })
}
