//! Tree-structured Parzen Estimator over blend weights.
//!
//! The search space is the unit box `[0, 1]^K`; every suggested point is
//! mapped onto the simplex with [`project_to_simplex`] before evaluation.
//! After a fixed startup schedule (the `K` one-hot vertices, then the
//! uniform point, then uniform random points) each suggestion splits the
//! history into the best trials and the rest, fits one 1-D Parzen estimator
//! per dimension to each group, draws candidates from the "good" density and
//! keeps, per dimension, the candidate with the largest good/bad density
//! ratio. The objective is maximized.

mod parzen;

pub use parzen::{fit_parzen, ParzenEstimator, MAX_BANDWIDTH, MIN_BANDWIDTH};

use std::io::Write;

use rand::Rng;
use thiserror::Error;

use crate::ensemble::{project_to_simplex, EnsembleError, WeightVector};
use crate::rng::{self, Pcg64, Stream};

#[derive(Debug, Error, PartialEq)]
pub enum TpeError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TpeConfig {
    pub n_trials: usize,
    /// Startup trials before the density model is used. `None` means
    /// `10 + K + 1`.
    pub n_startup: Option<usize>,
    pub gamma_cap: usize,
    pub gamma_frac: f64,
    pub n_ei_candidates: usize,
    pub prior_weight: f64,
    pub seed: u64,
}

impl Default for TpeConfig {
    fn default() -> Self {
        Self {
            n_trials: 200,
            n_startup: None,
            gamma_cap: 25,
            gamma_frac: 0.25,
            n_ei_candidates: 24,
            prior_weight: 1.0,
            seed: 0,
        }
    }
}

impl TpeConfig {
    pub fn startup_trials(&self, dim: usize) -> usize {
        self.n_startup.unwrap_or(10 + dim + 1)
    }

    /// Number of trials in the good group for a history of `n` trials.
    pub fn good_count(&self, n: usize) -> usize {
        let by_frac = (self.gamma_frac * n as f64).floor() as usize;
        by_frac.min(self.gamma_cap).max(1)
    }

    pub fn validate(&self, dim: usize) -> Result<(), TpeError> {
        if dim == 0 {
            return Err(TpeError::Config("search dimension must be positive".into()));
        }
        let startup = self.startup_trials(dim);
        // Vertices plus the uniform point are what make the best trial
        // dominate every single model and the plain average.
        if startup < dim + 1 {
            return Err(TpeError::Config(format!(
                "n_startup = {startup} must cover the {dim} vertices and the uniform point"
            )));
        }
        if self.n_trials < startup {
            return Err(TpeError::Config(format!(
                "n_trials = {} is smaller than n_startup = {startup}",
                self.n_trials
            )));
        }
        if !(self.gamma_frac > 0.0 && self.gamma_frac < 1.0) {
            return Err(TpeError::Config(format!(
                "gamma_frac must lie in (0, 1), got {}",
                self.gamma_frac
            )));
        }
        if self.n_ei_candidates == 0 {
            return Err(TpeError::Config(
                "n_ei_candidates must be at least 1".into(),
            ));
        }
        if !(self.prior_weight.is_finite() && self.prior_weight > 0.0) {
            return Err(TpeError::Config(format!(
                "prior_weight must be positive, got {}",
                self.prior_weight
            )));
        }
        Ok(())
    }
}

/// One evaluated point. Non-finite objective values are stored as `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub raw: Vec<f64>,
    pub weights: WeightVector,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best: Trial,
    pub best_index: usize,
    pub history: Vec<Trial>,
}

/// Indices of the trials in the good group: finite values only, best first,
/// ties broken by earlier index.
pub fn good_indices(history: &[Trial], cfg: &TpeConfig) -> Vec<usize> {
    let mut ranked: Vec<usize> = (0..history.len())
        .filter(|&i| history[i].value.is_finite())
        .collect();
    // Stable sort keeps index order among equal values.
    ranked.sort_by(|&a, &b| history[b].value.total_cmp(&history[a].value));
    ranked.truncate(cfg.good_count(history.len()));
    ranked
}

/// Proposes the next raw point in `[0, 1]^dim`.
pub fn suggest(history: &[Trial], dim: usize, cfg: &TpeConfig, rng: &mut Pcg64) -> Vec<f64> {
    let index = history.len();
    if index < cfg.startup_trials(dim) {
        return if index < dim {
            let mut vertex = vec![0.0; dim];
            vertex[index] = 1.0;
            vertex
        } else if index == dim {
            vec![0.5; dim]
        } else {
            (0..dim).map(|_| rng.gen::<f64>()).collect()
        };
    }

    let good = good_indices(history, cfg);
    let mut is_good = vec![false; history.len()];
    for &i in &good {
        is_good[i] = true;
    }
    (0..dim)
        .map(|d| {
            let good_obs: Vec<f64> = good.iter().map(|&i| history[i].raw[d]).collect();
            let bad_obs: Vec<f64> = (0..history.len())
                .filter(|&i| !is_good[i])
                .map(|i| history[i].raw[d])
                .collect();
            let l = ParzenEstimator::fit(&good_obs, cfg.prior_weight)
                .expect("raw points lie in [0, 1] and prior weight is positive");
            let g = ParzenEstimator::fit(&bad_obs, cfg.prior_weight)
                .expect("raw points lie in [0, 1] and prior weight is positive");
            let mut best = (f64::NEG_INFINITY, 0.5);
            for _ in 0..cfg.n_ei_candidates {
                let x = l.sample(rng);
                let score = l.density(x).ln() - g.density(x).ln();
                if score > best.0 {
                    best = (score, x);
                }
            }
            best.1
        })
        .collect()
}

/// Runs `cfg.n_trials` suggest → project → evaluate rounds and returns the
/// best trial (earliest on ties) with the full history.
pub fn optimize<F>(
    dim: usize,
    cfg: &TpeConfig,
    mut objective: F,
) -> Result<OptimizeResult, TpeError>
where
    F: FnMut(&WeightVector) -> f64,
{
    cfg.validate(dim)?;
    let mut rng = rng::stream(cfg.seed, Stream::Tpe);
    let mut history: Vec<Trial> = Vec::with_capacity(cfg.n_trials);
    let mut best_index = 0;
    for t in 0..cfg.n_trials {
        let raw = suggest(&history, dim, cfg, &mut rng);
        let weights = project_to_simplex(&raw)?;
        let value = objective(&weights);
        let value = if value.is_finite() {
            value
        } else {
            f64::NEG_INFINITY
        };
        if t > 0 && value > history[best_index].value {
            best_index = t;
        }
        history.push(Trial {
            raw,
            weights,
            value,
        });
    }
    Ok(OptimizeResult {
        best: history[best_index].clone(),
        best_index,
        history,
    })
}

/// Writes the trial history as TSV: index, raw coordinates, projected
/// weights, objective value.
pub fn write_trials<W: Write>(
    mut w: W,
    names: &[String],
    history: &[Trial],
) -> std::io::Result<()> {
    write!(w, "trial_index")?;
    for n in names {
        write!(w, "\traw_{n}")?;
    }
    for n in names {
        write!(w, "\tweight_{n}")?;
    }
    writeln!(w, "\tvalue")?;
    for (i, t) in history.iter().enumerate() {
        write!(w, "{i}")?;
        for x in &t.raw {
            write!(w, "\t{x:?}")?;
        }
        for x in t.weights.as_slice() {
            write!(w, "\t{x:?}")?;
        }
        writeln!(w, "\t{:?}", t.value)?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n_trials: usize, n_startup: usize) -> TpeConfig {
        TpeConfig {
            n_trials,
            n_startup: Some(n_startup),
            ..Default::default()
        }
    }

    fn trial(raw: Vec<f64>, value: f64) -> Trial {
        let weights = project_to_simplex(&raw).unwrap();
        Trial {
            raw,
            weights,
            value,
        }
    }

    #[test]
    fn startup_schedule() {
        let c = cfg(20, 6);
        let mut rng = rng::stream(0, Stream::Tpe);
        assert_eq!(suggest(&[], 3, &c, &mut rng), vec![1.0, 0.0, 0.0]);
        let two = vec![
            trial(vec![1.0, 0.0, 0.0], 0.0),
            trial(vec![0.0, 1.0, 0.0], 0.0),
        ];
        assert_eq!(suggest(&two, 3, &c, &mut rng), vec![0.0, 0.0, 1.0]);
        let mut three = two.clone();
        three.push(trial(vec![0.0, 0.0, 1.0], 0.0));
        assert_eq!(suggest(&three, 3, &c, &mut rng), vec![0.5, 0.5, 0.5]);
        three.push(trial(vec![0.5; 3], 0.0));
        let random = suggest(&three, 3, &c, &mut rng);
        assert!(random.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn good_split_counts_and_ties() {
        let c = TpeConfig::default();
        assert_eq!(c.good_count(1), 1);
        assert_eq!(c.good_count(8), 2);
        assert_eq!(c.good_count(1000), 25);
        let history = vec![
            trial(vec![0.1], 1.0),
            trial(vec![0.2], f64::NEG_INFINITY),
            trial(vec![0.3], 2.0),
            trial(vec![0.4], 2.0),
            trial(vec![0.5], 0.5),
            trial(vec![0.6], 0.0),
            trial(vec![0.7], 0.0),
            trial(vec![0.8], 0.0),
        ];
        assert_eq!(good_indices(&history, &c), vec![2, 3]);
        let all_bad = vec![trial(vec![0.1], f64::NEG_INFINITY); 4];
        assert!(good_indices(&all_bad, &c).is_empty());
    }

    #[test]
    fn constant_objective() {
        let r = optimize(3, &cfg(30, 14), |_| 0.7).unwrap();
        assert_eq!(r.best.value, 0.7);
        assert_eq!(r.best_index, 0);
        assert!(r.history.iter().all(|t| t.value == 0.7));
        assert_eq!(r.history.len(), 30);
    }

    #[test]
    fn non_finite_values_become_neg_inf() {
        let mut calls = 0;
        let r = optimize(2, &cfg(20, 5), |w| {
            calls += 1;
            if calls % 3 == 0 {
                f64::NAN
            } else {
                w.as_slice()[0]
            }
        })
        .unwrap();
        assert!(r.history.iter().any(|t| t.value == f64::NEG_INFINITY));
        assert!(r.best.value.is_finite());
        assert!(r
            .history
            .iter()
            .all(|t| t.value == f64::NEG_INFINITY || t.value.is_finite()));
    }

    #[test]
    fn config_validation() {
        assert!(optimize(3, &cfg(10, 3), |_| 0.0).is_err());
        assert!(optimize(3, &cfg(3, 4), |_| 0.0).is_err());
        assert!(optimize(0, &cfg(10, 4), |_| 0.0).is_err());
        let bad_gamma = TpeConfig {
            gamma_frac: 1.0,
            ..cfg(20, 4)
        };
        assert!(optimize(3, &bad_gamma, |_| 0.0).is_err());
        let no_candidates = TpeConfig {
            n_ei_candidates: 0,
            ..cfg(20, 4)
        };
        assert!(optimize(3, &no_candidates, |_| 0.0).is_err());
        assert_eq!(TpeConfig::default().startup_trials(3), 14);
    }

    #[test]
    fn deterministic_history() {
        let f = |w: &WeightVector| -(w.as_slice()[0] - 0.3).powi(2);
        let a = optimize(
            3,
            &TpeConfig {
                seed: 9,
                n_trials: 60,
                ..Default::default()
            },
            f,
        )
        .unwrap();
        let b = optimize(
            3,
            &TpeConfig {
                seed: 9,
                n_trials: 60,
                ..Default::default()
            },
            f,
        )
        .unwrap();
        assert_eq!(a, b);
        let c = optimize(
            3,
            &TpeConfig {
                seed: 10,
                n_trials: 60,
                ..Default::default()
            },
            f,
        )
        .unwrap();
        assert_ne!(a.history, c.history);
    }

    #[test]
    fn trials_tsv_layout() {
        let history = vec![
            trial(vec![1.0, 0.0], 0.5),
            trial(vec![0.5, 0.5], f64::NEG_INFINITY),
        ];
        let mut buf = Vec::new();
        write_trials(&mut buf, &["a".into(), "b".into()], &history).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "trial_index\traw_a\traw_b\tweight_a\tweight_b\tvalue\n\
             0\t1.0\t0.0\t1.0\t0.0\t0.5\n\
             1\t0.5\t0.5\t0.5\t0.5\t-inf\n"
        );
    }
}
