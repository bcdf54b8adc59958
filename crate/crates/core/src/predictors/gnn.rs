//! A small message-passing link scorer with hand-written gradients.
//!
//! Node states start from a trainable embedding table and go through `L`
//! rounds of `H ← relu(Â · H · W)`, where `Â` is a normalized adjacency with
//! self-loops. A pair `(i, j)` is scored by a two-layer MLP applied to the
//! elementwise product `h_i ⊙ h_j`, and the logistic function maps the logit
//! to a probability.
//!
//! Training minimizes the pairwise squared surrogate
//! `mean (margin − (s⁺ − s⁻))²` over (positive, sampled negative) logit pairs
//! with full-batch gradient descent, either plain or with Adam moment
//! estimates.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis, Zip};
use rand::Rng;

use super::PredictError;
use crate::graph::{sample_non_edges, Graph, Pair};
use crate::rng::{self, Pcg64, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    /// `D^{-1/2} (A + I) D^{-1/2}` with `D` the degrees of `A + I`.
    #[default]
    GcnSymmetric,
    /// Row mean over the neighbors and the node itself.
    Mean,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::GcnSymmetric => "gcn",
            Aggregation::Mean => "mean",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregation {
    type Err = PredictError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gcn" | "gcn_symmetric" => Ok(Aggregation::GcnSymmetric),
            "mean" => Ok(Aggregation::Mean),
            other => Err(PredictError::Argument(format!(
                "unknown aggregation {other:?} (expected gcn or mean)"
            ))),
        }
    }
}

/// Sparse normalized adjacency `Â` (self-loops included), row-major.
#[derive(Debug, Clone)]
pub struct Propagation {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Propagation {
    pub fn new(graph: &Graph, aggregation: Aggregation) -> Self {
        let n = graph.node_count();
        let deg: Vec<f64> = (0..n).map(|u| graph.degree(u) as f64 + 1.0).collect();
        let rows = (0..n)
            .map(|u| {
                let mut row: Vec<(usize, f64)> = graph
                    .neighbors(u)
                    .iter()
                    .copied()
                    .chain(std::iter::once(u))
                    .map(|v| {
                        let w = match aggregation {
                            Aggregation::GcnSymmetric => 1.0 / (deg[u] * deg[v]).sqrt(),
                            Aggregation::Mean => 1.0 / deg[u],
                        };
                        (v, w)
                    })
                    .collect();
                row.sort_unstable_by_key(|e| e.0);
                row
            })
            .collect();
        Self { rows }
    }

    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    /// `Â · x`
    fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(x.raw_dim());
        for (u, row) in self.rows.iter().enumerate() {
            let mut target = out.row_mut(u);
            for &(v, w) in row {
                target.scaled_add(w, &x.row(v));
            }
        }
        out
    }

    /// `Âᵀ · y`
    fn apply_transpose(&self, y: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(y.raw_dim());
        for (u, row) in self.rows.iter().enumerate() {
            let source = y.row(u);
            for &(v, w) in row {
                out.row_mut(v).scaled_add(w, &source);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnnConfig {
    pub dim: usize,
    pub layers: usize,
    pub aggregation: Aggregation,
}

impl Default for GnnConfig {
    fn default() -> Self {
        Self {
            dim: 32,
            layers: 2,
            aggregation: Aggregation::GcnSymmetric,
        }
    }
}

/// Update rule applied to the full-batch gradient each epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    /// `θ ← θ − lr · g`
    Sgd,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    #[default]
    Adam,
}

impl Optimizer {
    pub fn name(self) -> &'static str {
        match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
        }
    }
}

impl FromStr for Optimizer {
    type Err = PredictError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            other => Err(PredictError::Argument(format!(
                "unknown optimizer {other:?} (expected sgd or adam)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub neg_per_pos: usize,
    pub margin: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.01,
            neg_per_pos: 3,
            margin: 1.0,
            optimizer: Optimizer::Adam,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PredictError> {
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(PredictError::Argument(format!(
                "learning_rate must be a finite value >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.neg_per_pos == 0 {
            return Err(PredictError::Argument(
                "neg_per_pos must be at least 1".into(),
            ));
        }
        if !self.margin.is_finite() {
            return Err(PredictError::Argument("margin must be finite".into()));
        }
        Ok(())
    }
}

/// Trainable parameters. Every block is public so tests can perturb it.
#[derive(Debug, Clone, PartialEq)]
pub struct GnnScorer {
    pub aggregation: Aggregation,
    /// `N × d` initial node states.
    pub embeddings: Array2<f64>,
    /// One `d × d` matrix per message-passing layer.
    pub layer_weights: Vec<Array2<f64>>,
    pub mlp_hidden: Array2<f64>,
    pub mlp_hidden_bias: Array1<f64>,
    pub mlp_out: Array1<f64>,
    pub mlp_out_bias: f64,
}

/// Gradient of the loss, shaped like [`GnnScorer`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embeddings: Array2<f64>,
    pub layer_weights: Vec<Array2<f64>>,
    pub mlp_hidden: Array2<f64>,
    pub mlp_hidden_bias: Array1<f64>,
    pub mlp_out: Array1<f64>,
    pub mlp_out_bias: f64,
}

macro_rules! flat_blocks {
    ($self:ident, $as_slice:ident, $from:path) => {{
        let mut blocks = Vec::with_capacity($self.layer_weights.len() + 5);
        blocks.push($self.embeddings.$as_slice().expect("standard layout"));
        for w in $self.layer_weights.iter_mut() {
            blocks.push(w.$as_slice().expect("standard layout"));
        }
        blocks.push($self.mlp_hidden.$as_slice().expect("standard layout"));
        blocks.push($self.mlp_hidden_bias.$as_slice().expect("standard layout"));
        blocks.push($self.mlp_out.$as_slice().expect("standard layout"));
        blocks.push($from(&mut $self.mlp_out_bias));
        blocks
    }};
}

impl Gradients {
    fn zeros_like(model: &GnnScorer) -> Self {
        Self {
            embeddings: Array2::zeros(model.embeddings.raw_dim()),
            layer_weights: model
                .layer_weights
                .iter()
                .map(|w| Array2::zeros(w.raw_dim()))
                .collect(),
            mlp_hidden: Array2::zeros(model.mlp_hidden.raw_dim()),
            mlp_hidden_bias: Array1::zeros(model.mlp_hidden_bias.raw_dim()),
            mlp_out: Array1::zeros(model.mlp_out.raw_dim()),
            mlp_out_bias: 0.0,
        }
    }

    /// Parameter blocks as flat slices, in declaration order.
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        flat_blocks!(self, as_slice_mut, std::slice::from_mut)
    }
}

/// First and second moment estimates for Adam.
struct AdamState {
    step: i32,
    first: Gradients,
    second: Gradients,
}

impl AdamState {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(model: &GnnScorer) -> Self {
        Self {
            step: 0,
            first: Gradients::zeros_like(model),
            second: Gradients::zeros_like(model),
        }
    }

    fn update(&mut self, model: &mut GnnScorer, grads: &mut Gradients, learning_rate: f64) {
        self.step += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.step);
        let c2 = 1.0 - Self::BETA2.powi(self.step);
        let params = model.blocks_mut();
        let g = grads.blocks_mut();
        let m = self.first.blocks_mut();
        let v = self.second.blocks_mut();
        for (((p, g), m), v) in params.into_iter().zip(g).zip(m).zip(v) {
            for i in 0..p.len() {
                m[i] = Self::BETA1 * m[i] + (1.0 - Self::BETA1) * g[i];
                v[i] = Self::BETA2 * v[i] + (1.0 - Self::BETA2) * g[i] * g[i];
                let m_hat = m[i] / c1;
                let v_hat = v[i] / c2;
                p[i] -= learning_rate * m_hat / (v_hat.sqrt() + Self::EPS);
            }
        }
    }
}

/// Positive pairs and their sampled negatives. Negative `m` is paired with
/// positive `m / neg_per_pos`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairBatch {
    pub pos: Vec<Pair>,
    pub neg: Vec<Pair>,
    pub neg_per_pos: usize,
}

impl PairBatch {
    pub fn new(pos: Vec<Pair>, neg: Vec<Pair>, neg_per_pos: usize) -> Result<Self, PredictError> {
        if pos.is_empty() || neg_per_pos == 0 || neg.len() != pos.len() * neg_per_pos {
            return Err(PredictError::Argument(format!(
                "batch needs {} negatives for {} positives, got {}",
                pos.len() * neg_per_pos,
                pos.len(),
                neg.len()
            )));
        }
        Ok(Self {
            pos,
            neg,
            neg_per_pos,
        })
    }

    /// Samples `neg_per_pos` uniform non-edges of `graph` per positive.
    pub fn sample(
        graph: &Graph,
        pos: &[Pair],
        neg_per_pos: usize,
        rng: &mut Pcg64,
    ) -> Result<Self, PredictError> {
        let neg = sample_non_edges(graph, pos.len() * neg_per_pos, rng)?;
        Self::new(pos.to_vec(), neg, neg_per_pos)
    }
}

struct Forward {
    /// `Â · X_l` for each layer.
    propagated: Vec<Array2<f64>>,
    /// Pre-activations `Â · X_l · W_l`.
    pre_activations: Vec<Array2<f64>>,
    /// Final node states.
    output: Array2<f64>,
}

struct PairForward {
    products: Array2<f64>,
    hidden_pre: Array2<f64>,
    hidden: Array2<f64>,
    logits: Array1<f64>,
}

#[inline]
fn relu(x: f64) -> f64 {
    // NaN passes through so divergence reaches the loss.
    if x < 0.0 {
        0.0
    } else {
        x
    }
}

#[inline]
pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn uniform_matrix(rows: usize, cols: usize, bound: f64, rng: &mut Pcg64) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-bound..=bound))
}

impl GnnScorer {
    /// Parameters drawn uniformly from `[-1/√d, 1/√d]`; biases start at zero.
    pub fn init(node_count: usize, cfg: &GnnConfig, seed: u64) -> Result<Self, PredictError> {
        Self::check_config(cfg)?;
        let d = cfg.dim;
        let bound = 1.0 / (d as f64).sqrt();
        let mut rng = rng::stream(seed, Stream::GnnInit);
        let embeddings = uniform_matrix(node_count, d, bound, &mut rng);
        let layer_weights = (0..cfg.layers)
            .map(|_| uniform_matrix(d, d, bound, &mut rng))
            .collect();
        let mlp_hidden = uniform_matrix(d, d, bound, &mut rng);
        let mlp_out = Array1::from_shape_simple_fn(d, || rng.gen_range(-bound..=bound));
        Ok(Self {
            aggregation: cfg.aggregation,
            embeddings,
            layer_weights,
            mlp_hidden,
            mlp_hidden_bias: Array1::zeros(d),
            mlp_out,
            mlp_out_bias: 0.0,
        })
    }

    /// All-zero parameters.
    pub fn zeros(node_count: usize, cfg: &GnnConfig) -> Result<Self, PredictError> {
        Self::check_config(cfg)?;
        let d = cfg.dim;
        Ok(Self {
            aggregation: cfg.aggregation,
            embeddings: Array2::zeros((node_count, d)),
            layer_weights: vec![Array2::zeros((d, d)); cfg.layers],
            mlp_hidden: Array2::zeros((d, d)),
            mlp_hidden_bias: Array1::zeros(d),
            mlp_out: Array1::zeros(d),
            mlp_out_bias: 0.0,
        })
    }

    fn check_config(cfg: &GnnConfig) -> Result<(), PredictError> {
        if cfg.dim == 0 {
            return Err(PredictError::Argument(
                "embedding dimension must be positive".into(),
            ));
        }
        if cfg.layers == 0 {
            return Err(PredictError::Argument(
                "at least one message-passing layer".into(),
            ));
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.embeddings.nrows()
    }

    pub fn dim(&self) -> usize {
        self.embeddings.ncols()
    }

    pub fn layers(&self) -> usize {
        self.layer_weights.len()
    }

    pub fn is_finite(&self) -> bool {
        self.embeddings.iter().all(|x| x.is_finite())
            && self
                .layer_weights
                .iter()
                .all(|w| w.iter().all(|x| x.is_finite()))
            && self.mlp_hidden.iter().all(|x| x.is_finite())
            && self.mlp_hidden_bias.iter().all(|x| x.is_finite())
            && self.mlp_out.iter().all(|x| x.is_finite())
            && self.mlp_out_bias.is_finite()
    }

    /// Builds `Â` for `graph` after checking it matches the embedding table.
    pub fn propagation(&self, graph: &Graph) -> Result<Propagation, PredictError> {
        if graph.node_count() != self.node_count() {
            return Err(PredictError::Argument(format!(
                "model has {} node embeddings but graph has {} nodes",
                self.node_count(),
                graph.node_count()
            )));
        }
        Ok(Propagation::new(graph, self.aggregation))
    }

    fn forward(&self, prop: &Propagation) -> Forward {
        let mut x = self.embeddings.clone();
        let mut propagated = Vec::with_capacity(self.layers());
        let mut pre_activations = Vec::with_capacity(self.layers());
        for w in &self.layer_weights {
            let p = prop.apply(&x);
            let z = p.dot(w);
            x = z.mapv(relu);
            propagated.push(p);
            pre_activations.push(z);
        }
        Forward {
            propagated,
            pre_activations,
            output: x,
        }
    }

    /// Final node representations `H⁽ᴸ⁾`.
    pub fn node_states(&self, prop: &Propagation) -> Array2<f64> {
        self.forward(prop).output
    }

    fn pair_forward(&self, states: &Array2<f64>, pairs: &[Pair]) -> PairForward {
        let d = self.dim();
        let mut products = Array2::zeros((pairs.len(), d));
        for (mut row, &(i, j)) in products.outer_iter_mut().zip(pairs) {
            Zip::from(&mut row)
                .and(&states.row(i))
                .and(&states.row(j))
                .for_each(|r, &a, &b| *r = a * b);
        }
        let hidden_pre = products.dot(&self.mlp_hidden) + &self.mlp_hidden_bias;
        let hidden = hidden_pre.mapv(relu);
        let logits = hidden.dot(&self.mlp_out) + self.mlp_out_bias;
        PairForward {
            products,
            hidden_pre,
            hidden,
            logits,
        }
    }

    /// Pre-logistic scores for `pairs` given precomputed node states.
    pub fn pair_logits(&self, states: &Array2<f64>, pairs: &[Pair]) -> Vec<f64> {
        self.pair_forward(states, pairs).logits.to_vec()
    }

    /// Link probabilities for `pairs` on `graph`.
    pub fn score_pairs(&self, graph: &Graph, pairs: &[Pair]) -> Result<Vec<f64>, PredictError> {
        for &p in pairs {
            graph.check_pair(p)?;
        }
        let prop = self.propagation(graph)?;
        let states = self.node_states(&prop);
        Ok(self
            .pair_logits(&states, pairs)
            .into_iter()
            .map(logistic)
            .collect())
    }

    /// Pairwise squared surrogate loss on a fixed batch.
    pub fn pairwise_loss(&self, prop: &Propagation, batch: &PairBatch, margin: f64) -> f64 {
        let states = self.node_states(prop);
        let pos = self.pair_logits(&states, &batch.pos);
        let neg = self.pair_logits(&states, &batch.neg);
        surrogate(&pos, &neg, batch.neg_per_pos, margin).0
    }

    /// Loss and its exact gradient with respect to every parameter block.
    pub fn loss_and_gradients(
        &self,
        prop: &Propagation,
        batch: &PairBatch,
        margin: f64,
    ) -> (f64, Gradients) {
        let fwd = self.forward(prop);
        let states = &fwd.output;
        let pairs: Vec<Pair> = batch.pos.iter().chain(&batch.neg).copied().collect();
        let pf = self.pair_forward(states, &pairs);
        let n_pos = batch.pos.len();
        let (pos_logits, neg_logits) = pf.logits.as_slice().unwrap().split_at(n_pos);
        let (loss, grad_pos, grad_neg) =
            surrogate(pos_logits, neg_logits, batch.neg_per_pos, margin);
        let grad_logits: Array1<f64> = grad_pos.into_iter().chain(grad_neg).collect();

        // Pair MLP.
        let mlp_out_bias = grad_logits.sum();
        let mlp_out = pf.hidden.t().dot(&grad_logits);
        let mut grad_hidden_pre = Array2::zeros(pf.hidden_pre.raw_dim());
        Zip::from(grad_hidden_pre.rows_mut())
            .and(pf.hidden_pre.rows())
            .and(&grad_logits)
            .for_each(|mut g_row, pre_row, &g| {
                Zip::from(&mut g_row)
                    .and(&pre_row)
                    .and(&self.mlp_out)
                    .for_each(|gv, &pre, &w| *gv = if pre > 0.0 { g * w } else { 0.0 });
            });
        let mlp_hidden = pf.products.t().dot(&grad_hidden_pre);
        let mlp_hidden_bias = grad_hidden_pre.sum_axis(Axis(0));
        let grad_products = grad_hidden_pre.dot(&self.mlp_hidden.t());

        // Hadamard combiner back to node states.
        let mut grad_x = Array2::zeros(states.raw_dim());
        for (g_row, &(i, j)) in grad_products.outer_iter().zip(&pairs) {
            let hi = states.row(i).to_owned();
            let hj = states.row(j).to_owned();
            grad_x.row_mut(i).scaled_add(1.0, &(&g_row * &hj));
            grad_x.row_mut(j).scaled_add(1.0, &(&g_row * &hi));
        }

        // Message-passing layers, last to first.
        let mut layer_weights = vec![Array2::zeros((0, 0)); self.layers()];
        for l in (0..self.layers()).rev() {
            let pre = &fwd.pre_activations[l];
            Zip::from(&mut grad_x).and(pre).for_each(|g, &z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            });
            layer_weights[l] = fwd.propagated[l].t().dot(&grad_x);
            let grad_p = grad_x.dot(&self.layer_weights[l].t());
            grad_x = prop.apply_transpose(&grad_p);
        }

        (
            loss,
            Gradients {
                embeddings: grad_x,
                layer_weights,
                mlp_hidden,
                mlp_hidden_bias,
                mlp_out,
                mlp_out_bias,
            },
        )
    }

    /// Parameter blocks as flat slices, in declaration order.
    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        flat_blocks!(self, as_slice_mut, std::slice::from_mut)
    }

    /// `θ ← θ − lr · ∇θ`
    pub fn apply_gradients(&mut self, grads: &Gradients, learning_rate: f64) {
        if learning_rate == 0.0 {
            return;
        }
        self.embeddings
            .scaled_add(-learning_rate, &grads.embeddings);
        for (w, g) in self.layer_weights.iter_mut().zip(&grads.layer_weights) {
            w.scaled_add(-learning_rate, g);
        }
        self.mlp_hidden
            .scaled_add(-learning_rate, &grads.mlp_hidden);
        self.mlp_hidden_bias
            .scaled_add(-learning_rate, &grads.mlp_hidden_bias);
        self.mlp_out.scaled_add(-learning_rate, &grads.mlp_out);
        self.mlp_out_bias -= learning_rate * grads.mlp_out_bias;
    }

    /// Full-batch gradient descent (plain or Adam) on `train_pos` over `graph`. Negatives are
    /// resampled every epoch. Returns the loss before each epoch's update.
    pub fn train(
        &mut self,
        graph: &Graph,
        train_pos: &[Pair],
        cfg: &TrainConfig,
    ) -> Result<Vec<f64>, PredictError> {
        cfg.validate()?;
        if train_pos.is_empty() {
            return Err(PredictError::Argument("no training edges".into()));
        }
        for &p in train_pos {
            graph.check_pair(p)?;
        }
        let prop = self.propagation(graph)?;
        let mut rng = rng::stream(cfg.seed, Stream::GnnTrain);
        let mut adam = AdamState::new(self);
        let mut trace = Vec::with_capacity(cfg.epochs);
        for epoch in 0..cfg.epochs {
            let batch = PairBatch::sample(graph, train_pos, cfg.neg_per_pos, &mut rng)?;
            let (loss, mut grads) = self.loss_and_gradients(&prop, &batch, cfg.margin);
            if !loss.is_finite() {
                return Err(PredictError::Training { epoch, loss });
            }
            trace.push(loss);
            if cfg.learning_rate == 0.0 {
                continue;
            }
            match cfg.optimizer {
                Optimizer::Sgd => self.apply_gradients(&grads, cfg.learning_rate),
                Optimizer::Adam => adam.update(self, &mut grads, cfg.learning_rate),
            }
        }
        Ok(trace)
    }
}

/// Loss plus its derivatives with respect to each positive and negative
/// logit.
fn surrogate(
    pos: &[f64],
    neg: &[f64],
    neg_per_pos: usize,
    margin: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let m = neg.len() as f64;
    let mut loss = 0.0;
    let mut grad_pos = vec![0.0; pos.len()];
    let mut grad_neg = vec![0.0; neg.len()];
    for (idx, &s_neg) in neg.iter().enumerate() {
        let p = idx / neg_per_pos;
        let residual = margin - (pos[p] - s_neg);
        loss += residual * residual;
        grad_pos[p] -= 2.0 * residual / m;
        grad_neg[idx] += 2.0 * residual / m;
    }
    (loss / m, grad_pos, grad_neg)
}

/// Probability that `pair` is a link under `model`, propagating over `graph`.
///
/// Recomputes every node state; use [`GnnScorer::score_pairs`] for batches.
pub fn gnn_forward(model: &GnnScorer, graph: &Graph, pair: Pair) -> Result<f64, PredictError> {
    Ok(model.score_pairs(graph, &[pair])?[0])
}

/// Trains a copy of `model` and returns it with the per-epoch loss trace.
pub fn gnn_train(
    model: &GnnScorer,
    graph: &Graph,
    train_pos: &[Pair],
    cfg: &TrainConfig,
) -> Result<(GnnScorer, Vec<f64>), PredictError> {
    let mut trained = model.clone();
    let trace = trained.train(graph, train_pos, cfg)?;
    Ok((trained, trace))
}
