//! Behavioural checks of the weight optimizer: where suggestions go, how
//! close it gets to a known optimum, and what the startup schedule
//! guarantees.

use linkens_core::ensemble::{project_to_simplex, WeightVector};
use linkens_core::rng::{self, Stream};
use linkens_core::tpe::{optimize, suggest, TpeConfig, Trial};
use proptest::prelude::*;

fn trial(raw: Vec<f64>, value: f64) -> Trial {
    let weights = project_to_simplex(&raw).unwrap();
    Trial {
        raw,
        weights,
        value,
    }
}

#[test]
fn suggestions_follow_the_good_cluster() {
    let cfg = TpeConfig {
        n_startup: Some(2),
        ..Default::default()
    };
    let mut history = Vec::new();
    for i in 0..8 {
        history.push(trial(vec![0.76 + 0.01 * i as f64, 0.5], 1.0));
    }
    for i in 0..24 {
        history.push(trial(vec![0.14 + 0.005 * i as f64, 0.5], 0.0));
    }
    let above = (0..100)
        .filter(|&seed| {
            let mut r = rng::stream(seed, Stream::Tpe);
            suggest(&history, 2, &cfg, &mut r)[0] > 0.5
        })
        .count();
    assert!(above >= 95, "only {above} of 100 suggestions above 0.5");
}

const TARGET: [f64; 3] = [0.6, 0.3, 0.1];

fn target_objective(w: &WeightVector) -> f64 {
    -w.as_slice()
        .iter()
        .zip(TARGET)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
}

/// Best point of the simplex grid with the given number of steps per unit.
fn grid_optimum(steps: usize) -> Vec<f64> {
    let mut best = (f64::NEG_INFINITY, vec![]);
    for i in 0..=steps {
        for j in 0..=steps - i {
            let w = vec![
                i as f64 / steps as f64,
                j as f64 / steps as f64,
                (steps - i - j) as f64 / steps as f64,
            ];
            let v = target_objective(&WeightVector::new(w.clone()).unwrap());
            if v > best.0 {
                best = (v, w);
            }
        }
    }
    best.1
}

fn distance_to_grid_optimum(seed: u64, grid: &[f64]) -> f64 {
    let cfg = TpeConfig {
        seed,
        ..Default::default()
    };
    let r = optimize(3, &cfg, target_objective).unwrap();
    r.best
        .weights
        .as_slice()
        .iter()
        .zip(grid)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn approaches_the_grid_optimum() {
    let grid = grid_optimum(20);
    assert_eq!(grid, vec![0.6, 0.3, 0.1]);
    let linf = distance_to_grid_optimum(0, &grid);
    assert!(linf <= 0.1, "L-inf distance {linf}");
}

/// With the 0.01 bandwidth floor the good set can collapse against a box
/// face and creep; a minority of seeds end just outside 0.1. Guard the rate.
#[test]
fn grid_optimum_hit_rate() {
    let grid = grid_optimum(20);
    let hits = (0..50)
        .filter(|&seed| distance_to_grid_optimum(seed, &grid) <= 0.1)
        .count();
    assert!(hits >= 40, "only {hits} of 50 seeds within 0.1");
}

#[test]
fn best_so_far_never_decreases() {
    let r = optimize(
        3,
        &TpeConfig {
            n_trials: 80,
            seed: 4,
            ..Default::default()
        },
        target_objective,
    )
    .unwrap();
    let mut running = f64::NEG_INFINITY;
    for t in &r.history {
        running = running.max(t.value);
    }
    assert_eq!(running, r.best.value);
    assert_eq!(r.history[r.best_index].value, r.best.value);
    assert!(r.history[..r.best_index]
        .iter()
        .all(|t| t.value < r.best.value));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn startup_points_are_dominated(
        coeffs in prop::collection::vec(-3.0f64..3.0, 4),
        center in prop::collection::vec(0.0f64..1.0, 4),
        seed in 0u64..1000,
    ) {
        // Bumpy objective with optimum away from the startup points.
        let f = |w: &WeightVector| {
            w.as_slice()
                .iter()
                .zip(&coeffs)
                .zip(&center)
                .map(|((x, c), m)| c * x - (x - m).abs().sqrt())
                .sum::<f64>()
        };
        let cfg = TpeConfig { n_trials: 40, seed, ..Default::default() };
        let r = optimize(4, &cfg, f).unwrap();
        for k in 0..4 {
            prop_assert!(r.best.value >= f(&WeightVector::vertex(4, k)));
        }
        prop_assert!(r.best.value >= f(&WeightVector::uniform(4)));
    }
}
