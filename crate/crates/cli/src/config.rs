//! Run settings layered as built-in defaults, then a `key=value` file, then
//! command-line flags.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use linkens_core::ensemble::{Normalization, ObjectiveMode};
use linkens_core::graph::SplitConfig;
use linkens_core::predictors::{GnnConfig, TrainConfig};
use linkens_core::tpe::TpeConfig;

/// Every recognized configuration key.
pub const KEYS: &[&str] = &[
    "seed",
    "k",
    "normalize",
    "objective",
    "trials",
    "n_startup",
    "gamma_cap",
    "gamma_frac",
    "n_ei_candidates",
    "prior_weight",
    "dim",
    "layers",
    "aggregation",
    "epochs",
    "learning_rate",
    "neg_per_pos",
    "margin",
    "optimizer",
    "valid_frac",
    "test_frac",
    "valid_neg",
    "test_neg",
    "predictors",
    "sbm_blocks",
    "sbm_p_in",
    "sbm_p_out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub k: usize,
    pub normalize: Normalization,
    pub objective: ObjectiveMode,
    /// `n_trials` lives here; the seed is taken from `seed` at use.
    pub tpe: TpeConfig,
    pub gnn: GnnConfig,
    pub train: TrainConfig,
    pub split: SplitConfig,
    pub predictors: Vec<String>,
    pub sbm_blocks: Vec<usize>,
    pub sbm_p_in: f64,
    pub sbm_p_out: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            k: 20,
            normalize: Normalization::default(),
            objective: ObjectiveMode::default(),
            tpe: TpeConfig::default(),
            gnn: GnnConfig::default(),
            train: TrainConfig::default(),
            // Hits@K on a few hundred negatives is too coarse to rank blends.
            split: SplitConfig {
                n_valid_neg: 1000,
                n_test_neg: 1000,
                ..SplitConfig::default()
            },
            predictors: vec![
                "common_neighbors".into(),
                "adamic_adar".into(),
                "gnn".into(),
            ],
            sbm_blocks: vec![20; 50],
            sbm_p_in: 0.3,
            sbm_p_out: 0.002,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| anyhow!("invalid value {value:?} for {key}: {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl RunConfig {
    /// Applies one setting. Unknown keys are an error listing the known ones.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "seed" => self.seed = parse(key, value)?,
            "k" => self.k = parse(key, value)?,
            "normalize" => self.normalize = parse(key, value)?,
            "objective" => self.objective = parse(key, value)?,
            "trials" => self.tpe.n_trials = parse(key, value)?,
            "n_startup" => self.tpe.n_startup = Some(parse(key, value)?),
            "gamma_cap" => self.tpe.gamma_cap = parse(key, value)?,
            "gamma_frac" => self.tpe.gamma_frac = parse(key, value)?,
            "n_ei_candidates" => self.tpe.n_ei_candidates = parse(key, value)?,
            "prior_weight" => self.tpe.prior_weight = parse(key, value)?,
            "dim" => self.gnn.dim = parse(key, value)?,
            "layers" => self.gnn.layers = parse(key, value)?,
            "aggregation" => self.gnn.aggregation = parse(key, value)?,
            "epochs" => self.train.epochs = parse(key, value)?,
            "learning_rate" => self.train.learning_rate = parse(key, value)?,
            "neg_per_pos" => self.train.neg_per_pos = parse(key, value)?,
            "margin" => self.train.margin = parse(key, value)?,
            "optimizer" => self.train.optimizer = parse(key, value)?,
            "valid_frac" => self.split.valid_frac = parse(key, value)?,
            "test_frac" => self.split.test_frac = parse(key, value)?,
            "valid_neg" => self.split.n_valid_neg = parse(key, value)?,
            "test_neg" => self.split.n_test_neg = parse(key, value)?,
            "predictors" => self.predictors = parse_list(key, value)?,
            "sbm_blocks" => self.sbm_blocks = parse_list(key, value)?,
            "sbm_p_in" => self.sbm_p_in = parse(key, value)?,
            "sbm_p_out" => self.sbm_p_out = parse(key, value)?,
            other => bail!(
                "unknown configuration key {other:?} (known keys: {})",
                KEYS.join(", ")
            ),
        }
        Ok(())
    }

    /// Applies a `key=value` assignment as given on the command line.
    pub fn set_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| anyhow!("expected KEY=VALUE, got {assignment:?}"))?;
        self.set(key.trim(), value)
    }

    /// Applies a config file body: `key=value` lines, `#` comments, blanks.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.set_assignment(line)
                .with_context(|| format!("config line {}", idx + 1))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        self.apply_text(&text)
            .with_context(|| format!("in config file {}", path.display()))
    }

    pub fn tpe_config(&self) -> TpeConfig {
        TpeConfig {
            seed: self.seed,
            ..self.tpe.clone()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            seed: self.seed,
            ..self.train
        }
    }
}
