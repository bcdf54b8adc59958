use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use linkens_cli::{
    cmd_ablate, cmd_demo, cmd_evaluate, cmd_optimize, cmd_score, cmd_split, objective_label,
    RunConfig,
};
use linkens_core::ensemble::{Normalization, ObjectiveMode};

/// Weighted ensembles of link predictors, tuned by a Parzen-estimator search.
#[derive(Debug, Parser)]
#[command(name = "linkens", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Settings shared by every command. Precedence: defaults < --config < flags.
#[derive(Debug, Args)]
struct Common {
    /// Seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// File of key=value settings.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// K for Hits@K [default: 20].
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Score normalization: none, minmax, zscore or rank [default: rank].
    #[arg(long, global = true, value_name = "METHOD")]
    normalize: Option<Normalization>,
    /// Search objective: hits or pos-mean [default: hits].
    #[arg(long, global = true, value_name = "MODE")]
    objective: Option<ObjectiveMode>,
    /// Weight-search trials [default: 200].
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Any configuration key, as KEY=VALUE; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Split an edge list into train/valid/test positives and sampled negatives.
    Split {
        edges: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Score the validation and test pairs of a split directory.
    Score {
        split_dir: PathBuf,
        /// Comma-separated predictor names.
        #[arg(long, value_delimiter = ',')]
        predictors: Option<Vec<String>>,
        /// Output directory [default: the split directory].
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Search blend weights on a validation score table.
    Optimize {
        valid_scores: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Report Hits@K and AUC of a blend and of each model.
    Evaluate {
        scores: PathBuf,
        weights: PathBuf,
        /// Fit normalizers on this table instead of the evaluated one.
        #[arg(long, value_name = "VALID_SCORES")]
        fit_on: Option<PathBuf>,
    },
    /// Compare uniform averaging with searched weights.
    Ablate {
        valid_scores: PathBuf,
        test_scores: PathBuf,
    },
    /// Run the whole pipeline on a synthetic block-model graph.
    Demo {
        #[arg(long, short, default_value = "demo_out")]
        out: PathBuf,
    },
}

fn build_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    for assignment in &common.set {
        cfg.set_assignment(assignment)?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(k) = common.k {
        cfg.k = k;
    }
    if let Some(n) = common.normalize {
        cfg.normalize = n;
    }
    if let Some(o) = common.objective {
        cfg.objective = o;
    }
    if let Some(t) = common.trials {
        cfg.tpe.n_trials = t;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = build_config(&cli.common)?;
    match cli.command {
        Command::Split { edges, out } => {
            let s = cmd_split(&edges, &out, &cfg)?;
            println!(
                "train_pos\t{}\nvalid_pos\t{}\nvalid_neg\t{}\ntest_pos\t{}\ntest_neg\t{}",
                s.train_pos.len(),
                s.valid_pos.len(),
                s.valid_neg.len(),
                s.test_pos.len(),
                s.test_neg.len()
            );
        }
        Command::Score {
            split_dir,
            predictors,
            out,
        } => {
            if let Some(p) = predictors {
                cfg.predictors = p;
            }
            let out = out.unwrap_or_else(|| split_dir.clone());
            let (valid, test) = cmd_score(&split_dir, &out, &cfg)?;
            println!(
                "scored {} validation and {} test pairs with {}",
                valid.len(),
                test.len(),
                cfg.predictors.join(", ")
            );
        }
        Command::Optimize { valid_scores, out } => {
            let search = cmd_optimize(&valid_scores, &out, &cfg)?;
            println!(
                "best validation {}: {} at trial {}",
                objective_label(&cfg),
                search.best_value(),
                search.result.best_index
            );
            for (name, w) in search.model_names.iter().zip(search.weights().as_slice()) {
                println!("weight {name}: {w}");
            }
        }
        Command::Evaluate {
            scores,
            weights,
            fit_on,
        } => print!(
            "{}",
            cmd_evaluate(&scores, &weights, fit_on.as_deref(), &cfg)?
        ),
        Command::Ablate {
            valid_scores,
            test_scores,
        } => print!("{}", cmd_ablate(&valid_scores, &test_scores, &cfg)?),
        Command::Demo { out } => print!("{}", cmd_demo(&out, &cfg)?.summary(&cfg)),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
