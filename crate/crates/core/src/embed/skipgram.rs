use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use super::{AliasTable, EmbedError, WalkCorpus};
use crate::math::{axpy, dot, sigmoid, softplus};
use crate::seed;
use crate::textgraph::NodeId;

/// Center ("input") and context ("output") vectors, both `n_nodes x dims`
/// and row-major. The center vectors are the embedding that gets exported.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    n_nodes: usize,
    dims: usize,
    center: Vec<f64>,
    context: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn zeros(n_nodes: usize, dims: usize) -> Self {
        EmbeddingMatrix {
            n_nodes,
            dims,
            center: alloc::vec![0.0; n_nodes * dims],
            context: alloc::vec![0.0; n_nodes * dims],
        }
    }

    /// Wrap exported center vectors; context vectors start at zero.
    pub fn from_center(n_nodes: usize, dims: usize, center: Vec<f64>) -> Result<Self, EmbedError> {
        if dims == 0 {
            return Err(EmbedError::Shape("dims must be at least 1"));
        }
        if center.len() != n_nodes * dims {
            return Err(EmbedError::Shape("data length is not n_nodes * dims"));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::Shape("non-finite entry"));
        }
        Ok(EmbeddingMatrix { n_nodes, dims, context: alloc::vec![0.0; center.len()], center })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn row(&self, node: NodeId) -> &[f64] {
        &self.center[node * self.dims..(node + 1) * self.dims]
    }

    pub fn row_mut(&mut self, node: NodeId) -> &mut [f64] {
        &mut self.center[node * self.dims..(node + 1) * self.dims]
    }

    pub fn context_row(&self, node: NodeId) -> &[f64] {
        &self.context[node * self.dims..(node + 1) * self.dims]
    }

    pub fn context_row_mut(&mut self, node: NodeId) -> &mut [f64] {
        &mut self.context[node * self.dims..(node + 1) * self.dims]
    }

    pub fn center_data(&self) -> &[f64] {
        &self.center
    }

    pub fn center_data_mut(&mut self) -> &mut [f64] {
        &mut self.center
    }

    pub fn context_data_mut(&mut self) -> &mut [f64] {
        &mut self.context
    }

    pub fn is_finite(&self) -> bool {
        self.center.iter().chain(&self.context).all(|v| v.is_finite())
    }

    pub fn cosine(&self, a: NodeId, b: NodeId) -> f64 {
        let (x, y) = (self.row(a), self.row(b));
        let denom = libm::sqrt(dot(x, x) * dot(y, y));
        if denom == 0.0 {
            0.0
        } else {
            dot(x, y) / denom
        }
    }
}

/// `(center, context)` pairs for every position and every other position
/// at most `window` steps away.
pub fn skipgram_pairs(walk: &[NodeId], window: usize) -> Vec<(NodeId, NodeId)> {
    let mut pairs = Vec::new();
    for (i, &center) in walk.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(walk.len().saturating_sub(1));
        for j in lo..=hi {
            if j != i {
                pairs.push((center, walk[j]));
            }
        }
    }
    pairs
}

/// Gradient of [`negative_sampling_loss`]: one center row and one context
/// row per scored node. Context entries are listed in scoring order and may
/// repeat; they add up.
#[derive(Debug, Clone, PartialEq)]
pub struct SgnsGradient {
    pub center: (NodeId, Vec<f64>),
    pub context: Vec<(NodeId, Vec<f64>)>,
}

/// `-ln s(f(c).g(o)) - sum_n ln s(-f(c).g(n))` with `s` the logistic
/// function, `f` the center vectors and `g` the context vectors.
///
/// An empty `negatives` list scores the positive pair alone.
pub fn negative_sampling_loss(
    center: NodeId,
    context: NodeId,
    negatives: &[NodeId],
    emb: &EmbeddingMatrix,
) -> (f64, SgnsGradient) {
    let h = emb.row(center);
    let mut grad_h = alloc::vec![0.0; emb.dims()];
    let mut rows = Vec::with_capacity(1 + negatives.len());
    let mut loss = 0.0;
    let targets = core::iter::once((context, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
    for (node, label) in targets {
        let out = emb.context_row(node);
        let score = dot(h, out);
        // d/ds of the pair loss is sigmoid(s) - label.
        loss += if label > 0.0 { softplus(-score) } else { softplus(score) };
        let g = sigmoid(score) - label;
        axpy(&mut grad_h, g, out);
        rows.push((node, h.iter().map(|x| g * x).collect()));
    }
    (loss, SgnsGradient { center: (center, grad_h), context: rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbedConfig {
    pub dims: usize,
    pub epochs: usize,
    /// Starting step size; decays linearly towards zero over training.
    pub learning_rate: f64,
    pub negatives: usize,
    pub context_window: usize,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig { dims: 20, epochs: 5, learning_rate: 0.025, negatives: 5, context_window: 5, seed: 0 }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<(), EmbedError> {
        if self.dims == 0 {
            return Err(EmbedError::InvalidParams("dims must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(EmbedError::InvalidParams("learning rate must be positive"));
        }
        if self.context_window == 0 {
            return Err(EmbedError::InvalidParams("context window must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRun {
    pub embeddings: EmbeddingMatrix,
    /// Probe-set loss before the first update.
    pub initial_loss: f64,
    /// Probe-set loss after each epoch.
    pub epoch_loss: Vec<f64>,
    /// Mean loss of each pair just before its own update, per epoch.
    pub online_loss: Vec<f64>,
}

const MIN_LR_FRACTION: f64 = 1e-4;
const NOISE_POWER: f64 = 0.75;
const PROBE_PAIRS: usize = 10_000;

/// Fixed sample of training pairs with pre-drawn negatives. Online loss
/// drifts upwards as the step size decays (recent updates on overlapping
/// windows stop flattering it), so per-epoch loss is measured on this.
struct Probe(Vec<(NodeId, NodeId, Vec<NodeId>)>);

impl Probe {
    fn draw(walks: &WalkCorpus, window: usize, k: usize, noise: Option<&AliasTable>, seed: u64) -> Self {
        let mut rng = seed::rng_from(seed);
        let usable: Vec<&Vec<NodeId>> = walks.walks.iter().filter(|w| w.len() > 1).collect();
        let mut pairs = Vec::new();
        if usable.is_empty() {
            return Probe(pairs);
        }
        for _ in 0..PROBE_PAIRS {
            let walk = usable[rng.gen_range(0..usable.len())];
            let i = rng.gen_range(0..walk.len());
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(walk.len() - 1);
            let mut j = rng.gen_range(lo..hi);
            if j >= i {
                j += 1;
            }
            let negatives = match noise {
                Some(noise) => (0..k).map(|_| noise.sample(&mut rng)).filter(|&n| n != walk[j]).collect(),
                None => Vec::new(),
            };
            pairs.push((walk[i], walk[j], negatives));
        }
        Probe(pairs)
    }

    fn loss(&self, emb: &EmbeddingMatrix) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        let total: f64 = self.0.iter().map(|(c, o, n)| negative_sampling_loss(*c, *o, n, emb).0).sum();
        total / self.0.len() as f64
    }
}

/// One SGD step on a positive pair and its negatives; returns the loss
/// before the update. Equivalent to applying the gradient of
/// [`negative_sampling_loss`] except that context rows are updated in place
/// as they are scored.
fn sgd_step(
    emb: &mut EmbeddingMatrix,
    center: NodeId,
    context: NodeId,
    negatives: &[NodeId],
    lr: f64,
    grad_h: &mut [f64],
    h: &mut [f64],
) -> f64 {
    h.copy_from_slice(emb.row(center));
    grad_h.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    let targets = core::iter::once((context, true)).chain(negatives.iter().map(|&n| (n, false)));
    for (node, positive) in targets {
        let out = emb.context_row_mut(node);
        let score = dot(h, out);
        loss += if positive { softplus(-score) } else { softplus(score) };
        let g = sigmoid(score) - if positive { 1.0 } else { 0.0 };
        axpy(grad_h, g, out);
        axpy(out, -lr * g, h);
    }
    axpy(emb.row_mut(center), -lr, grad_h);
    loss
}

/// Train skip-gram vectors on the walk corpus.
///
/// Negatives are drawn from node degree raised to 0.75 and never equal the
/// positive context. Walk order is reshuffled every epoch. Single-threaded
/// and fully determined by `cfg.seed`.
pub fn train_embeddings(walks: &WalkCorpus, cfg: &EmbedConfig) -> Result<EmbeddingRun, EmbedError> {
    cfg.validate()?;
    if walks.walks.is_empty() || walks.n_nodes == 0 {
        return Err(EmbedError::EmptyWalkCorpus);
    }
    let mut rng = seed::rng_from(cfg.seed);
    let d = cfg.dims;
    let mut emb = EmbeddingMatrix::zeros(walks.n_nodes, d);
    let half = 0.5 / d as f64;
    for v in emb.center_data_mut() {
        *v = rng.gen_range(-half..half);
    }

    let noise_weights: Vec<f64> =
        walks.degrees.iter().map(|&deg| libm::pow(deg as f64, NOISE_POWER)).collect();
    let noise = AliasTable::new(&noise_weights);
    let probe = Probe::draw(walks, cfg.context_window, cfg.negatives, noise.as_ref(), seed::derive_named(cfg.seed, "probe"));
    let initial_loss = probe.loss(&emb);

    let pairs_per_epoch: usize =
        walks.walks.iter().map(|w| skipgram_pairs_len(w.len(), cfg.context_window)).sum();
    let total = (pairs_per_epoch * cfg.epochs).max(1) as f64;
    let mut done = 0usize;

    let mut order: Vec<usize> = (0..walks.walks.len()).collect();
    let mut negatives = Vec::with_capacity(cfg.negatives);
    let mut grad_h = alloc::vec![0.0; d];
    let mut h = alloc::vec![0.0; d];
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    let mut online_loss = Vec::with_capacity(cfg.epochs);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut n_pairs = 0usize;
        for &wi in &order {
            for (center, context) in skipgram_pairs(&walks.walks[wi], cfg.context_window) {
                let lr = cfg.learning_rate * (1.0 - done as f64 / total).max(MIN_LR_FRACTION);
                negatives.clear();
                if let Some(noise) = &noise {
                    for _ in 0..cfg.negatives {
                        let n = noise.sample(&mut rng);
                        if n != context {
                            negatives.push(n);
                        }
                    }
                }
                loss_sum += sgd_step(&mut emb, center, context, &negatives, lr, &mut grad_h, &mut h);
                n_pairs += 1;
                done += 1;
            }
        }
        online_loss.push(if n_pairs == 0 { 0.0 } else { loss_sum / n_pairs as f64 });
        epoch_loss.push(probe.loss(&emb));
    }
    Ok(EmbeddingRun { embeddings: emb, initial_loss, epoch_loss, online_loss })
}

fn skipgram_pairs_len(len: usize, window: usize) -> usize {
    (0..len).map(|i| i.min(window) + (len - 1 - i).min(window)).sum()
}
