//! Independent checks of the message-passing scorer: a dense straight-line
//! re-implementation of the forward pass, central finite differences for the
//! gradients, and an end-to-end training run on a block-structured graph.

use linkens_core::graph::{make_split, synthetic_graph, Graph, SplitConfig, SyntheticKind};
use linkens_core::metrics::auc;
use linkens_core::predictors::{
    gnn_forward, Aggregation, GnnConfig, GnnScorer, PairBatch, TrainConfig,
};
use linkens_core::rng::{self, Stream};

type Dense = Vec<Vec<f64>>;

fn dense_adjacency(g: &Graph, agg: Aggregation) -> Dense {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for &(u, v) in g.edges() {
        a[u][v] = 1.0;
        a[v][u] = 1.0;
    }
    for (i, row) in a.iter_mut().enumerate() {
        row[i] += 1.0;
    }
    let deg: Vec<f64> = a.iter().map(|r| r.iter().sum()).collect();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            out[i][j] = match agg {
                Aggregation::GcnSymmetric => a[i][j] / (deg[i].sqrt() * deg[j].sqrt()),
                Aggregation::Mean => a[i][j] / deg[i],
            };
        }
    }
    out
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut s = 0.0;
            for t in 0..k {
                s += a[i][t] * b[t][j];
            }
            c[i][j] = s;
        }
    }
    c
}

fn to_dense(x: &ndarray::Array2<f64>) -> Dense {
    x.outer_iter().map(|r| r.to_vec()).collect()
}

#[allow(clippy::needless_range_loop)] // index form mirrors the matrix algebra
fn dense_score(m: &GnnScorer, g: &Graph, i: usize, j: usize) -> f64 {
    let a = dense_adjacency(g, m.aggregation);
    let mut h = to_dense(&m.embeddings);
    for w in &m.layer_weights {
        h = matmul(&matmul(&a, &h), &to_dense(w));
        for row in &mut h {
            for x in row.iter_mut() {
                *x = x.max(0.0);
            }
        }
    }
    let d = m.dim();
    let z: Vec<f64> = (0..d).map(|t| h[i][t] * h[j][t]).collect();
    let w1 = to_dense(&m.mlp_hidden);
    let mut s = m.mlp_out_bias;
    for c in 0..d {
        let mut a1 = m.mlp_hidden_bias[c];
        for t in 0..d {
            a1 += z[t] * w1[t][c];
        }
        s += a1.max(0.0) * m.mlp_out[c];
    }
    1.0 / (1.0 + (-s).exp())
}

fn six_node_graph() -> Graph {
    Graph::from_edges(6, [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)]).unwrap()
}

#[test]
fn forward_matches_dense_oracle() {
    let g = six_node_graph();
    for agg in [Aggregation::GcnSymmetric, Aggregation::Mean] {
        for layers in [1, 2, 3] {
            let cfg = GnnConfig {
                dim: 5,
                layers,
                aggregation: agg,
            };
            let mut m = GnnScorer::init(6, &cfg, 17).unwrap();
            // Nonzero biases so they are exercised too.
            m.mlp_hidden_bias
                .iter_mut()
                .enumerate()
                .for_each(|(i, b)| *b = 0.01 * i as f64);
            m.mlp_out_bias = -0.2;
            for i in 0..6 {
                for j in 0..6 {
                    if i == j {
                        continue;
                    }
                    let got = gnn_forward(&m, &g, (i, j)).unwrap();
                    let want = dense_score(&m, &g, i, j);
                    assert!(
                        (got - want).abs() < 1e-12,
                        "{agg:?} L={layers} ({i},{j}): {got} vs {want}"
                    );
                }
            }
        }
    }
}

/// Every scalar parameter, addressed as (block, index).
fn param_mut(m: &mut GnnScorer, block: usize, idx: usize) -> &mut f64 {
    let layers = m.layers();
    match block {
        0 => m.embeddings.iter_mut().nth(idx).unwrap(),
        b if b <= layers => m.layer_weights[b - 1].iter_mut().nth(idx).unwrap(),
        b if b == layers + 1 => m.mlp_hidden.iter_mut().nth(idx).unwrap(),
        b if b == layers + 2 => m.mlp_hidden_bias.iter_mut().nth(idx).unwrap(),
        b if b == layers + 3 => m.mlp_out.iter_mut().nth(idx).unwrap(),
        _ => &mut m.mlp_out_bias,
    }
}

fn analytic_blocks(g: &linkens_core::predictors::Gradients) -> Vec<(String, Vec<f64>)> {
    let mut out = vec![(
        "embeddings".to_string(),
        g.embeddings.iter().copied().collect(),
    )];
    for (l, w) in g.layer_weights.iter().enumerate() {
        out.push((format!("layer_weights[{l}]"), w.iter().copied().collect()));
    }
    out.push(("mlp_hidden".into(), g.mlp_hidden.iter().copied().collect()));
    out.push(("mlp_hidden_bias".into(), g.mlp_hidden_bias.to_vec()));
    out.push(("mlp_out".into(), g.mlp_out.to_vec()));
    out.push(("mlp_out_bias".into(), vec![g.mlp_out_bias]));
    out
}

/// Per-block relative error ‖analytic − numeric‖₂ / max(‖analytic‖₂, ‖numeric‖₂, 1e-6).
///
/// The loss only depends on logit differences, so the output bias (and the
/// hidden bias whenever every hidden unit is active) has an exactly zero
/// gradient. Central differences carry ~1e-11 of round-off at this step size,
/// so the floor keeps such blocks from reading as error while staying two
/// orders of magnitude below the typical block norm (~1e-4).
fn gradient_check(agg: Aggregation, seed: u64) -> Vec<(String, f64)> {
    let g = six_node_graph();
    let cfg = GnnConfig {
        dim: 4,
        layers: 2,
        aggregation: agg,
    };
    let mut model = GnnScorer::init(6, &cfg, seed).unwrap();
    model.mlp_hidden_bias.fill(0.05);
    model.mlp_out_bias = 0.1;
    let prop = model.propagation(&g).unwrap();
    let mut rng = rng::stream(seed, Stream::GnnTrain);
    let batch = PairBatch::sample(&g, g.edges(), 1, &mut rng).unwrap();
    let margin = 1.0;
    let (_, grads) = model.loss_and_gradients(&prop, &batch, margin);

    let step = 1e-5;
    let mut report = Vec::new();
    for (block, (name, analytic)) in analytic_blocks(&grads).into_iter().enumerate() {
        let mut numeric = Vec::with_capacity(analytic.len());
        for idx in 0..analytic.len() {
            let mut plus = model.clone();
            *param_mut(&mut plus, block, idx) += step;
            let mut minus = model.clone();
            *param_mut(&mut minus, block, idx) -= step;
            let fd = (plus.pairwise_loss(&prop, &batch, margin)
                - minus.pairwise_loss(&prop, &batch, margin))
                / (2.0 * step);
            numeric.push(fd);
        }
        let diff: f64 = analytic
            .iter()
            .zip(&numeric)
            .map(|(a, n)| (a - n).powi(2))
            .sum::<f64>()
            .sqrt();
        let na = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
        let nn = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = diff / na.max(nn).max(1e-6);
        report.push((name, rel));
    }
    report
}

#[test]
fn gradients_match_finite_differences() {
    for agg in [Aggregation::GcnSymmetric, Aggregation::Mean] {
        for seed in [1, 2, 3] {
            for (block, rel) in gradient_check(agg, seed) {
                assert!(
                    rel < 1e-4,
                    "{agg:?} seed {seed} {block}: relative error {rel}"
                );
            }
        }
    }
}

fn sbm_training_auc(seed: u64) -> (f64, Vec<f64>) {
    let g = synthetic_graph(
        &SyntheticKind::Sbm {
            block_sizes: vec![40, 40],
            p_in: 0.25,
            p_out: 0.01,
        },
        seed,
    )
    .unwrap();
    let split = make_split(
        &g,
        &SplitConfig {
            valid_frac: 0.1,
            test_frac: 0.1,
            n_valid_neg: 50,
            n_test_neg: 50,
        },
        seed,
    )
    .unwrap();
    let train_graph = split.train_graph();
    let mut model = GnnScorer::init(g.node_count(), &GnnConfig::default(), seed).unwrap();
    let cfg = TrainConfig {
        epochs: 200,
        seed,
        ..Default::default()
    };
    let trace = model.train(&train_graph, &split.train_pos, &cfg).unwrap();

    let mut rng = rng::stream(seed ^ 0xABCD, Stream::GnnTrain);
    let batch = PairBatch::sample(&train_graph, &split.train_pos, 1, &mut rng).unwrap();
    let pos = model.score_pairs(&train_graph, &batch.pos).unwrap();
    let neg = model.score_pairs(&train_graph, &batch.neg).unwrap();
    (auc(&pos, &neg).unwrap().value, trace)
}

#[test]
fn training_separates_sbm_edges() {
    for seed in [1, 2, 3] {
        let (value, trace) = sbm_training_auc(seed);
        assert!(trace.iter().all(|l| l.is_finite()));
        assert!(
            trace.last().unwrap() < &trace[0],
            "loss did not decrease: {trace:?}"
        );
        assert!(value > 0.8, "seed {seed}: training AUC {value}");
    }
}
