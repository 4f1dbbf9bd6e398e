//! Linear-chain conditional random field: scoring, inference, training, and
//! model serialization.
//!
//! A sequence `y` over feature vector `x` scores
//! `Σ_t Σ_{f ∈ x_t} w_obs[f, y_t] + Σ_{t ≥ 1} w_trans[y_{t-1}, y_t]`.
//! Inference runs in log space; training minimizes the L2-regularized
//! negative log-likelihood with the deterministic batch minimizer from
//! [`crate::optimize`], starting from all-zero weights.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureConfig, FeatureDictionary, FeatureVector};
use crate::optimize::{self, LbfgsOptions, OptimizeError};
use crate::tagging::{LabelSequence, LabelSet};

/// Instances per parallel gradient chunk. Fixed (never derived from the
/// thread count) so the floating-point reduction order is identical for any
/// `--jobs` value.
const GRAD_CHUNK: usize = 64;

/// Dense CRF weights: an observation block indexed by `(feature, label)`
/// followed by a transition block indexed by `(label, label)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfParams {
    n_features: usize,
    n_labels: usize,
    w: Vec<f64>,
}

impl CrfParams {
    pub fn zeros(n_features: usize, n_labels: usize) -> Self {
        CrfParams { n_features, n_labels, w: vec![0.0; dim(n_features, n_labels)] }
    }

    pub fn from_weights(n_features: usize, n_labels: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != dim(n_features, n_labels) {
            return Err(Error::Model(format!(
                "weight vector has length {}, expected {}",
                w.len(),
                dim(n_features, n_labels)
            )));
        }
        Ok(CrfParams { n_features, n_labels, w })
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    #[inline]
    pub fn obs(&self, feature: u32, label: usize) -> f64 {
        self.w[feature as usize * self.n_labels + label]
    }

    #[inline]
    pub fn trans(&self, from: usize, to: usize) -> f64 {
        self.w[self.n_features * self.n_labels + from * self.n_labels + to]
    }

    pub fn obs_mut(&mut self, feature: u32, label: usize) -> &mut f64 {
        &mut self.w[feature as usize * self.n_labels + label]
    }

    pub fn trans_mut(&mut self, from: usize, to: usize) -> &mut f64 {
        let off = self.n_features * self.n_labels;
        &mut self.w[off + from * self.n_labels + to]
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }
}

fn dim(n_features: usize, n_labels: usize) -> usize {
    n_features * n_labels + n_labels * n_labels
}

/// One training example: features and gold labels of equal length.
#[derive(Debug, Clone)]
pub struct TrainInstance {
    pub features: FeatureVector,
    pub labels: LabelSequence,
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Per-position label scores: `node[t][y] = Σ_{f ∈ x_t} w_obs[f, y]`.
fn node_scores(n_labels: usize, w: &[f64], x: &FeatureVector) -> Vec<f64> {
    let mut node = vec![0.0; x.len() * n_labels];
    for (t, feats) in x.positions.iter().enumerate() {
        let row = &mut node[t * n_labels..(t + 1) * n_labels];
        for &f in feats {
            let wrow = &w[f as usize * n_labels..(f as usize + 1) * n_labels];
            for (r, wv) in row.iter_mut().zip(wrow) {
                *r += wv;
            }
        }
    }
    node
}

#[inline]
fn trans_row(n_features: usize, n_labels: usize, w: &[f64], from: usize) -> &[f64] {
    let off = n_features * n_labels + from * n_labels;
    &w[off..off + n_labels]
}

/// Joint score of a label sequence.
pub fn sequence_score(params: &CrfParams, x: &FeatureVector, y: &[usize]) -> f64 {
    assert_eq!(x.len(), y.len(), "feature/label length mismatch");
    let mut score = 0.0;
    for (t, feats) in x.positions.iter().enumerate() {
        for &f in feats {
            score += params.obs(f, y[t]);
        }
        if t > 0 {
            score += params.trans(y[t - 1], y[t]);
        }
    }
    score
}

/// Log-partition value plus unigram and bigram posterior marginals.
#[derive(Debug, Clone)]
pub struct Marginals {
    pub log_z: f64,
    n_labels: usize,
    /// `unigram[t * L + y] = P(y_t = y | x)`
    unigram: Vec<f64>,
    /// `bigram[(t-1) * L² + a * L + b] = P(y_{t-1} = a, y_t = b | x)`, `t ≥ 1`
    bigram: Vec<f64>,
}

impl Marginals {
    pub fn len(&self) -> usize {
        self.unigram.len() / self.n_labels
    }

    pub fn is_empty(&self) -> bool {
        self.unigram.is_empty()
    }

    #[inline]
    pub fn unigram(&self, t: usize, y: usize) -> f64 {
        self.unigram[t * self.n_labels + y]
    }

    /// Marginal of the transition into position `t` (requires `t ≥ 1`).
    #[inline]
    pub fn bigram(&self, t: usize, from: usize, to: usize) -> f64 {
        assert!(t >= 1);
        let l = self.n_labels;
        self.bigram[(t - 1) * l * l + from * l + to]
    }
}

/// Forward-backward in log space.
pub fn log_partition_and_marginals(params: &CrfParams, x: &FeatureVector) -> Marginals {
    marginals_impl(params.n_features, params.n_labels, &params.w, x)
}

fn marginals_impl(n_features: usize, n_labels: usize, w: &[f64], x: &FeatureVector) -> Marginals {
    let t_len = x.len();
    assert!(t_len > 0, "empty sequence");
    let l = n_labels;
    let node = node_scores(l, w, x);

    let mut alpha = vec![0.0; t_len * l];
    alpha[..l].copy_from_slice(&node[..l]);
    let mut scratch = vec![0.0; l];
    for t in 1..t_len {
        for b in 0..l {
            for a in 0..l {
                scratch[a] = alpha[(t - 1) * l + a] + trans_row(n_features, l, w, a)[b];
            }
            alpha[t * l + b] = log_sum_exp(&scratch) + node[t * l + b];
        }
    }
    let log_z = log_sum_exp(&alpha[(t_len - 1) * l..]);

    let mut beta = vec![0.0; t_len * l];
    for t in (0..t_len - 1).rev() {
        for a in 0..l {
            let row = trans_row(n_features, l, w, a);
            for b in 0..l {
                scratch[b] = row[b] + node[(t + 1) * l + b] + beta[(t + 1) * l + b];
            }
            beta[t * l + a] = log_sum_exp(&scratch);
        }
    }

    let mut unigram = vec![0.0; t_len * l];
    for t in 0..t_len {
        for y in 0..l {
            unigram[t * l + y] = (alpha[t * l + y] + beta[t * l + y] - log_z).exp();
        }
    }
    let mut bigram = vec![0.0; t_len.saturating_sub(1) * l * l];
    for t in 1..t_len {
        for a in 0..l {
            let row = trans_row(n_features, l, w, a);
            for b in 0..l {
                bigram[(t - 1) * l * l + a * l + b] =
                    (alpha[(t - 1) * l + a] + row[b] + node[t * l + b] + beta[t * l + b] - log_z)
                        .exp();
            }
        }
    }
    Marginals { log_z, n_labels: l, unigram, bigram }
}

/// Highest-scoring label sequence and its score. Ties are broken toward the
/// lowest label index at each backtracking step, so the all-zero model
/// decodes to all-`O`.
pub fn viterbi_decode(params: &CrfParams, x: &FeatureVector) -> (LabelSequence, f64) {
    let t_len = x.len();
    assert!(t_len > 0, "empty sequence");
    let l = params.n_labels;
    let node = node_scores(l, &params.w, x);

    let mut delta = vec![0.0; t_len * l];
    let mut back = vec![0usize; t_len * l];
    delta[..l].copy_from_slice(&node[..l]);
    for t in 1..t_len {
        for b in 0..l {
            let mut best = f64::NEG_INFINITY;
            let mut best_a = 0;
            for a in 0..l {
                let cand = delta[(t - 1) * l + a] + params.trans(a, b);
                if cand > best {
                    best = cand;
                    best_a = a;
                }
            }
            delta[t * l + b] = best + node[t * l + b];
            back[t * l + b] = best_a;
        }
    }

    let mut best = f64::NEG_INFINITY;
    let mut y_last = 0;
    for (y, &score) in delta[(t_len - 1) * l..].iter().enumerate() {
        if score > best {
            best = score;
            y_last = y;
        }
    }
    let mut path = vec![0usize; t_len];
    path[t_len - 1] = y_last;
    for t in (1..t_len).rev() {
        path[t - 1] = back[t * l + path[t]];
    }
    (path, best)
}

/// L2-regularized negative log-likelihood of a batch and its gradient.
///
/// `obj = Σ_i [log Z(x_i) − score(x_i, y_i)] + (l2/2)·‖w‖²`; the gradient is
/// expected minus empirical feature counts plus `l2·w`. Instances are
/// processed in fixed-size chunks whose partial sums are reduced in chunk
/// order, so the result is bitwise identical for any thread count.
pub fn nll_and_gradient(
    n_features: usize,
    n_labels: usize,
    w: &[f64],
    batch: &[TrainInstance],
    l2: f64,
) -> (f64, Vec<f64>) {
    assert_eq!(w.len(), dim(n_features, n_labels));
    let trans_off = n_features * n_labels;
    let l = n_labels;

    let partials: Vec<(f64, Vec<f64>)> = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut obj = 0.0;
            let mut grad = vec![0.0; w.len()];
            for inst in chunk {
                let x = &inst.features;
                let y = &inst.labels;
                let marg = marginals_impl(n_features, l, w, x);
                let mut score = 0.0;
                for (t, feats) in x.positions.iter().enumerate() {
                    for &f in feats {
                        score += w[f as usize * l + y[t]];
                        grad[f as usize * l + y[t]] -= 1.0;
                        let grow = &mut grad[f as usize * l..(f as usize + 1) * l];
                        for (g, m) in grow.iter_mut().zip(&marg.unigram[t * l..(t + 1) * l]) {
                            *g += m;
                        }
                    }
                    if t > 0 {
                        score += w[trans_off + y[t - 1] * l + y[t]];
                        grad[trans_off + y[t - 1] * l + y[t]] -= 1.0;
                        let brow = &marg.bigram[(t - 1) * l * l..t * l * l];
                        for (g, m) in grad[trans_off..trans_off + l * l].iter_mut().zip(brow) {
                            *g += m;
                        }
                    }
                }
                obj += marg.log_z - score;
            }
            (obj, grad)
        })
        .collect();

    let mut obj = 0.0;
    let mut grad = vec![0.0; w.len()];
    for (o, g) in partials {
        obj += o;
        for (acc, v) in grad.iter_mut().zip(&g) {
            *acc += v;
        }
    }
    for (g, wi) in grad.iter_mut().zip(w) {
        obj += 0.5 * l2 * wi * wi;
        *g += l2 * wi;
    }
    (obj, grad)
}

/// Training hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hyper {
    pub l2: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Recorded for provenance; batch training itself draws no random numbers.
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper { l2: 1.0, max_iter: 200, tol: 1e-4, seed: 42 }
    }
}

impl Hyper {
    pub fn validate(&self) -> Result<()> {
        if self.l2.is_nan() || self.l2 < 0.0 {
            return Err(Error::Config("l2 must be non-negative".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Optimizer outcome recorded inside the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    pub iterations: usize,
    pub final_objective: f64,
    pub grad_inf_norm: f64,
    pub converged: bool,
}

/// A trained per-lexical-unit model.
#[derive(Debug, Clone)]
pub struct CrfModel {
    pub label_set: LabelSet,
    pub dict: FeatureDictionary,
    pub params: CrfParams,
    pub config: FeatureConfig,
    pub training: TrainStats,
}

impl CrfModel {
    pub fn lu(&self) -> &str {
        self.label_set.lu()
    }
}

/// Trains one CRF on encoded instances. The dictionary is frozen before
/// optimization; weights start at zero.
pub fn train(
    instances: &[TrainInstance],
    label_set: LabelSet,
    mut dict: FeatureDictionary,
    config: FeatureConfig,
    hyper: &Hyper,
) -> Result<CrfModel> {
    hyper.validate()?;
    config.validate()?;
    if instances.is_empty() {
        return Err(Error::Train(format!("no training instances for '{}'", label_set.lu())));
    }
    let n_labels = label_set.len();
    let n_features = dict.len();
    for inst in instances {
        if inst.features.len() != inst.labels.len() || inst.features.is_empty() {
            return Err(Error::Train("instance with mismatched or empty feature/label sequences".into()));
        }
        if inst.labels.iter().any(|&y| y >= n_labels) {
            return Err(Error::Train("label id out of range".into()));
        }
        if inst.features.positions.iter().flatten().any(|&f| f as usize >= n_features) {
            return Err(Error::Train("feature id out of range".into()));
        }
    }
    dict.freeze();

    let opts = LbfgsOptions { max_iter: hyper.max_iter, tol: hyper.tol, ..LbfgsOptions::default() };
    let l2 = hyper.l2;
    let min = optimize::minimize(
        |w| nll_and_gradient(n_features, n_labels, w, instances, l2),
        vec![0.0; dim(n_features, n_labels)],
        &opts,
    )
    .map_err(|e: OptimizeError| Error::Train(format!("{} of '{}'", e, label_set.lu())))?;

    Ok(CrfModel {
        params: CrfParams { n_features, n_labels, w: min.x },
        label_set,
        dict,
        config,
        training: TrainStats {
            iterations: min.iterations,
            final_objective: min.objective,
            grad_inf_norm: min.grad_inf_norm,
            converged: min.converged,
        },
    })
}

// --- model (de)serialization ---------------------------------------------

/// Formats a weight with 17 significant digits, enough for an exact `f64`
/// round-trip through decimal.
fn weight_literal(x: f64) -> Result<Box<serde_json::value::RawValue>> {
    serde_json::value::RawValue::from_string(format!("{x:.16e}"))
        .map_err(|e| Error::Model(format!("unserializable weight {x}: {e}")))
}

#[derive(Serialize)]
struct ModelWire<'a> {
    version: u32,
    lu: &'a str,
    labels: Vec<String>,
    features: &'a [String],
    w_obs: Vec<Vec<Box<serde_json::value::RawValue>>>,
    w_trans: Vec<Vec<Box<serde_json::value::RawValue>>>,
    feature_config: &'a FeatureConfig,
    training: &'a TrainStats,
}

#[derive(Deserialize)]
struct ModelWireOwned {
    version: u32,
    lu: String,
    labels: Vec<String>,
    features: Vec<String>,
    w_obs: Vec<Vec<f64>>,
    w_trans: Vec<Vec<f64>>,
    feature_config: FeatureConfig,
    training: TrainStats,
}

pub const MODEL_VERSION: u32 = 1;

impl CrfModel {
    /// Serializes the model as versioned JSON. Weights are written as decimal
    /// literals with 17 significant digits, so parsing restores them exactly
    /// and equal models serialize to identical bytes.
    pub fn to_json_bytes(&self) -> Result<Vec<u8>> {
        let l = self.params.n_labels;
        let mut w_obs = Vec::with_capacity(self.params.n_features);
        for f in 0..self.params.n_features {
            let mut row = Vec::with_capacity(l);
            for y in 0..l {
                row.push(weight_literal(self.params.obs(f as u32, y))?);
            }
            w_obs.push(row);
        }
        let mut w_trans = Vec::with_capacity(l);
        for a in 0..l {
            let mut row = Vec::with_capacity(l);
            for b in 0..l {
                row.push(weight_literal(self.params.trans(a, b))?);
            }
            w_trans.push(row);
        }
        let wire = ModelWire {
            version: MODEL_VERSION,
            lu: self.lu(),
            labels: self.label_set.labels().iter().map(|l| l.to_string()).collect(),
            features: self.dict.names(),
            w_obs,
            w_trans,
            feature_config: &self.config,
            training: &self.training,
        };
        let mut bytes = serde_json::to_vec_pretty(&wire).map_err(|e| Error::Model(e.to_string()))?;
        bytes.push(b'\n');
        Ok(bytes)
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<CrfModel> {
        let wire: ModelWireOwned =
            serde_json::from_slice(bytes).map_err(|e| Error::Model(e.to_string()))?;
        if wire.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                wire.version
            )));
        }
        let label_set = LabelSet::from_rendered(wire.lu, &wire.labels)?;
        let dict = FeatureDictionary::from_names(wire.features)?;
        let n_labels = label_set.len();
        let n_features = dict.len();
        if wire.w_obs.len() != n_features || wire.w_obs.iter().any(|r| r.len() != n_labels) {
            return Err(Error::Model("w_obs shape does not match features × labels".into()));
        }
        if wire.w_trans.len() != n_labels || wire.w_trans.iter().any(|r| r.len() != n_labels) {
            return Err(Error::Model("w_trans shape does not match labels × labels".into()));
        }
        let mut w = Vec::with_capacity(dim(n_features, n_labels));
        w.extend(wire.w_obs.into_iter().flatten());
        w.extend(wire.w_trans.into_iter().flatten());
        wire.feature_config.validate()?;
        Ok(CrfModel {
            label_set,
            dict,
            params: CrfParams { n_features, n_labels, w },
            config: wire.feature_config,
            training: wire.training,
        })
    }
}
