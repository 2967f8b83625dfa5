//! Fully connected ReLU classifier with a softmax head, trained by
//! mini-batch Adam on cross-entropy.
//!
//! The network is deliberately plain: dense layers only, ReLU on every
//! hidden layer, softmax on the last. Gradients are analytic (validated
//! against central finite differences in the test suite), and every source
//! of randomness — initialization, batch shuffling — is keyed by explicit
//! seeds so entire training runs are bit-reproducible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{minibatches, Dataset};
use crate::error::{Error, Result};
use crate::hpo::HyperConfig;
use crate::linalg::{dot, Matrix};
use crate::metrics::accuracy;
use crate::seed::derive_seed;

/// Probabilities are floored at this value before taking logs, so the loss
/// stays finite even when softmax underflows to an exact zero.
pub const LOG_FLOOR: f64 = 1e-12;

/// Feed-forward network: `weights[l]` has shape `dims[l+1] x dims[l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    layer_dims: Vec<usize>,
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Model {
    /// Assembles a model from explicit parameters, checking the shape chain.
    pub fn from_parts(weights: Vec<Matrix>, biases: Vec<Vec<f64>>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Shape("model needs at least one layer".into()));
        }
        if weights.len() != biases.len() {
            return Err(Error::Shape(format!(
                "{} weight matrices but {} bias vectors",
                weights.len(),
                biases.len()
            )));
        }
        let mut layer_dims = vec![weights[0].cols()];
        for (l, (w, b)) in weights.iter().zip(&biases).enumerate() {
            if w.cols() != layer_dims[l] {
                return Err(Error::Shape(format!(
                    "layer {l} expects {} inputs, previous layer emits {}",
                    w.cols(),
                    layer_dims[l]
                )));
            }
            if b.len() != w.rows() {
                return Err(Error::Shape(format!(
                    "layer {l} has {} output rows but {} biases",
                    w.rows(),
                    b.len()
                )));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric(format!("layer {l} bias is not finite")));
            }
            layer_dims.push(w.rows());
        }
        Ok(Self {
            layer_dims,
            weights,
            biases,
        })
    }

    /// `[input_dim, hidden..., n_classes]`.
    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// Number of weight layers (hidden layers plus the softmax head).
    pub fn n_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().expect("non-empty dims")
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.rows() * w.cols() + b.len())
            .sum()
    }

    /// Flattens all parameters: per layer, the weight matrix row-major, then
    /// the bias vector. Gradients flatten in the same order.
    pub fn get_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        out
    }

    /// Writes a flat parameter vector (see [`Model::get_params`]) back into
    /// the model.
    pub fn set_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "model has {} parameters, got {}",
                self.param_count(),
                params.len()
            )));
        }
        let mut offset = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let nw = w.rows() * w.cols();
            w.as_mut_slice().copy_from_slice(&params[offset..offset + nw]);
            offset += nw;
            let nb = b.len();
            b.copy_from_slice(&params[offset..offset + nb]);
            offset += nb;
        }
        Ok(())
    }
}

/// He-normal initialization: weights drawn N(0, 2/fan_in), biases zero, all
/// randomness keyed by `seed`.
pub fn init_model(layer_dims: &[usize], seed: u64) -> Result<Model> {
    if layer_dims.len() < 2 {
        return Err(Error::Shape(format!(
            "need input and output dims, got {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(Error::Shape(format!("zero-width layer in {layer_dims:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weights = Vec::with_capacity(layer_dims.len() - 1);
    let mut biases = Vec::with_capacity(layer_dims.len() - 1);
    for l in 0..layer_dims.len() - 1 {
        let fan_in = layer_dims[l];
        let fan_out = layer_dims[l + 1];
        let dist = Normal::new(0.0, (2.0 / fan_in as f64).sqrt()).expect("positive std");
        let entries: Vec<f64> = (0..fan_in * fan_out).map(|_| dist.sample(&mut rng)).collect();
        weights.push(Matrix::from_raw(fan_out, fan_in, entries));
        biases.push(vec![0.0; fan_out]);
    }
    Model::from_parts(weights, biases)
}

/// Per-layer intermediate values from one forward pass.
///
/// `activations[0]` is the input batch; `activations[l]` for `1 <= l < L`
/// are post-ReLU, and `activations[L]` are the softmax probabilities.
/// `pre_activations[l-1]` holds `z` for layer `l`.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Matrix>,
    pub pre_activations: Vec<Matrix>,
}

impl ForwardCache {
    /// Softmax output, shape `m x n_classes`.
    pub fn probs(&self) -> &Matrix {
        self.activations.last().expect("non-empty cache")
    }

    /// Activations feeding the last layer (the input itself when L = 1).
    pub fn penultimate(&self) -> &Matrix {
        &self.activations[self.activations.len() - 2]
    }
}

/// Row-wise numerically stable softmax: shift by the row max before exp.
pub fn softmax_rows(z: &Matrix) -> Matrix {
    let mut out = z.clone();
    for i in 0..out.rows() {
        let row = out.row_mut(i);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        // The shifted max contributes exp(0) = 1, so sum >= 1.
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Runs the batch through the network, caching all pre-activations and
/// activations for the backward pass.
pub fn forward(model: &Model, x: &Matrix) -> Result<ForwardCache> {
    if x.cols() != model.input_dim() {
        return Err(Error::Shape(format!(
            "input has {} columns, model expects {}",
            x.cols(),
            model.input_dim()
        )));
    }
    let m = x.rows();
    let n_layers = model.n_layers();
    let mut activations = Vec::with_capacity(n_layers + 1);
    let mut pre_activations = Vec::with_capacity(n_layers);
    activations.push(x.clone());
    for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
        let prev = &activations[l];
        let out_dim = w.rows();
        let mut z = Matrix::zeros(m, out_dim);
        for s in 0..m {
            let a_row = prev.row(s);
            let z_row = z.row_mut(s);
            for (o, zv) in z_row.iter_mut().enumerate() {
                *zv = dot(a_row, w.row(o)) + b[o];
            }
        }
        let a = if l + 1 == n_layers {
            softmax_rows(&z)
        } else {
            let mut a = z.clone();
            a.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
            a
        };
        pre_activations.push(z);
        activations.push(a);
    }
    Ok(ForwardCache {
        activations,
        pre_activations,
    })
}

/// Mean cross-entropy: `-(1/m) sum log p[i][y_i]`, probabilities floored at
/// [`LOG_FLOOR`] so the loss stays finite.
pub fn loss_ce(probs: &Matrix, labels: &[usize]) -> Result<f64> {
    if probs.rows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} probability rows but {} labels",
            probs.rows(),
            labels.len()
        )));
    }
    if probs.rows() == 0 {
        return Err(Error::Data("loss of an empty batch".into()));
    }
    let mut total = 0.0;
    for (i, &y) in labels.iter().enumerate() {
        if y >= probs.cols() {
            return Err(Error::Label {
                index: i,
                label: y,
                classes: probs.cols(),
            });
        }
        total -= probs.get(i, y).max(LOG_FLOOR).ln();
    }
    Ok(total / labels.len() as f64)
}

/// Parameter gradients, shaped exactly like the model.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub d_weights: Vec<Matrix>,
    pub d_biases: Vec<Vec<f64>>,
}

impl Gradients {
    /// Flat view in [`Model::get_params`] order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.d_weights.iter().zip(&self.d_biases) {
            out.extend_from_slice(w.as_slice());
            out.extend_from_slice(b);
        }
        out
    }
}

/// Analytic gradients of `loss_ce(forward(model, x), labels)`.
///
/// The head delta is `(probs - onehot(y)) / m`; hidden layers apply the
/// chain rule through ReLU (derivative taken as 0 at exactly 0).
pub fn backward(model: &Model, cache: &ForwardCache, labels: &[usize]) -> Result<Gradients> {
    let n_layers = model.n_layers();
    if cache.activations.len() != n_layers + 1 || cache.pre_activations.len() != n_layers {
        return Err(Error::Shape(
            "forward cache does not match the model's layer count".into(),
        ));
    }
    for (l, w) in model.weights.iter().enumerate() {
        if cache.activations[l].cols() != w.cols() || cache.activations[l + 1].cols() != w.rows() {
            return Err(Error::Shape(format!(
                "forward cache shape mismatch at layer {l}"
            )));
        }
    }
    let probs = cache.probs();
    let m = probs.rows();
    if m != labels.len() {
        return Err(Error::Shape(format!(
            "cache holds {m} samples but {} labels given",
            labels.len()
        )));
    }
    if m == 0 {
        return Err(Error::Data("backward on an empty batch".into()));
    }
    if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= probs.cols()) {
        return Err(Error::Label {
            index,
            label,
            classes: probs.cols(),
        });
    }

    // delta starts as dE/dz at the head and is pulled back layer by layer.
    let mut delta = probs.clone();
    let inv_m = 1.0 / m as f64;
    for (i, &y) in labels.iter().enumerate() {
        let row = delta.row_mut(i);
        row.iter_mut().for_each(|v| *v *= inv_m);
        row[y] -= inv_m;
    }

    let mut d_weights: Vec<Matrix> = Vec::with_capacity(n_layers);
    let mut d_biases: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    for l in (0..n_layers).rev() {
        let prev = &cache.activations[l];
        let w = &model.weights[l];
        let (out_dim, in_dim) = (w.rows(), w.cols());

        let mut dw = Matrix::zeros(out_dim, in_dim);
        let mut db = vec![0.0; out_dim];
        for s in 0..m {
            let d_row = delta.row(s);
            let a_row = prev.row(s);
            for (o, &d) in d_row.iter().enumerate() {
                if d != 0.0 {
                    let target = dw.row_mut(o);
                    for (t, &a) in target.iter_mut().zip(a_row) {
                        *t += d * a;
                    }
                }
                db[o] += d;
            }
        }

        if l > 0 {
            let z_prev = &cache.pre_activations[l - 1];
            let mut next = Matrix::zeros(m, in_dim);
            for s in 0..m {
                let d_row = delta.row(s);
                let out_row = next.row_mut(s);
                for (o, &d) in d_row.iter().enumerate() {
                    if d != 0.0 {
                        for (t, &wv) in out_row.iter_mut().zip(w.row(o)) {
                            *t += d * wv;
                        }
                    }
                }
                // ReLU pullback: zero wherever the pre-activation was <= 0.
                for (t, &z) in out_row.iter_mut().zip(z_prev.row(s)) {
                    if z <= 0.0 {
                        *t = 0.0;
                    }
                }
            }
            delta = next;
        }

        d_weights.push(dw);
        d_biases.push(db);
    }
    d_weights.reverse();
    d_biases.reverse();
    Ok(Gradients {
        d_weights,
        d_biases,
    })
}

/// Adam accumulators; moments are shaped like the model they optimize.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m_w: Vec<Matrix>,
    v_w: Vec<Matrix>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
}

impl AdamState {
    /// Zeroed state with the standard defaults (0.9, 0.999, 1e-8).
    pub fn new(model: &Model) -> Self {
        Self {
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m_w: model.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
            v_w: model.weights.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect(),
            m_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            v_b: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    state_layer: usize,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    bc1: f64,
    bc2: f64,
) -> Result<()> {
    for (((p, &g), mi), vi) in params.iter_mut().zip(grads).zip(m.iter_mut()).zip(v.iter_mut()) {
        if !g.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite gradient in layer {state_layer}"
            )));
        }
        *mi = beta1 * *mi + (1.0 - beta1) * g;
        *vi = beta2 * *vi + (1.0 - beta2) * g * g;
        let m_hat = *mi / bc1;
        let v_hat = *vi / bc2;
        *p -= lr * m_hat / (v_hat.sqrt() + eps);
    }
    Ok(())
}

/// One Adam step, in place. Backbone of [`adam_step`] and [`train`].
fn adam_step_inplace(
    model: &mut Model,
    grads: &Gradients,
    state: &mut AdamState,
    lr: f64,
) -> Result<()> {
    if !lr.is_finite() || lr < 0.0 {
        return Err(Error::Data(format!("learning rate must be finite and >= 0, got {lr}")));
    }
    if grads.d_weights.len() != model.weights.len() {
        return Err(Error::Shape(format!(
            "gradients cover {} layers, model has {}",
            grads.d_weights.len(),
            model.weights.len()
        )));
    }
    state.step += 1;
    let bc1 = 1.0 - state.beta1.powi(state.step as i32);
    let bc2 = 1.0 - state.beta2.powi(state.step as i32);
    let (beta1, beta2, eps) = (state.beta1, state.beta2, state.eps);
    for l in 0..model.weights.len() {
        let dw = &grads.d_weights[l];
        let db = &grads.d_biases[l];
        if dw.rows() != model.weights[l].rows()
            || dw.cols() != model.weights[l].cols()
            || db.len() != model.biases[l].len()
        {
            return Err(Error::Shape(format!("gradient shape mismatch at layer {l}")));
        }
        adam_update_slice(
            model.weights[l].as_mut_slice(),
            dw.as_slice(),
            state.m_w[l].as_mut_slice(),
            state.v_w[l].as_mut_slice(),
            l,
            lr,
            beta1,
            beta2,
            eps,
            bc1,
            bc2,
        )?;
        adam_update_slice(
            &mut model.biases[l],
            db,
            &mut state.m_b[l],
            &mut state.v_b[l],
            l,
            lr,
            beta1,
            beta2,
            eps,
            bc1,
            bc2,
        )?;
    }
    Ok(())
}

/// Bias-corrected Adam update, returned as new values.
pub fn adam_step(
    model: &Model,
    grads: &Gradients,
    state: &AdamState,
    lr: f64,
) -> Result<(Model, AdamState)> {
    let mut model = model.clone();
    let mut state = state.clone();
    adam_step_inplace(&mut model, grads, &mut state, lr)?;
    Ok((model, state))
}

/// Loss and accuracy measured on the full training set after an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochStats {
    pub loss: f64,
    pub accuracy: f64,
}

/// Per-epoch training statistics, in epoch order.
pub type TrainHistory = Vec<EpochStats>;

/// Trains with mini-batch Adam for up to `epochs` epochs.
///
/// The shuffle of epoch `e` is keyed by `derive_seed(seed, e)`, so histories
/// are reproducible and probe runs (epochs = 1) shuffle exactly like the
/// first epoch of a full run with the same seed. After each epoch the loss
/// and accuracy over the whole training set are recorded; when
/// `early_stop_on_fit` is set, training stops at the first epoch whose
/// accuracy reaches 1.0.
pub fn train(
    model: Model,
    data: &Dataset,
    hp: &HyperConfig,
    epochs: usize,
    early_stop_on_fit: bool,
    seed: u64,
) -> Result<(Model, TrainHistory)> {
    if data.is_empty() {
        return Err(Error::Data("cannot train on an empty dataset".into()));
    }
    if data.n_features() != model.input_dim() {
        return Err(Error::Shape(format!(
            "dataset has {} features, model expects {}",
            data.n_features(),
            model.input_dim()
        )));
    }
    if let Some((index, &label)) = data
        .labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l >= model.output_dim())
    {
        return Err(Error::Label {
            index,
            label,
            classes: model.output_dim(),
        });
    }

    let mut model = model;
    let mut state = AdamState::new(&model);
    let mut history = TrainHistory::new();
    for epoch in 0..epochs {
        let shuffle = derive_seed(seed, epoch as u64);
        for batch in minibatches(data.len(), hp.batch_size, Some(shuffle))? {
            let sub = data.subset(&batch.indices);
            let cache = forward(&model, &sub.features)?;
            let loss = loss_ce(cache.probs(), &sub.labels)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss at epoch {epoch}"
                )));
            }
            let grads = backward(&model, &cache, &sub.labels)?;
            adam_step_inplace(&mut model, &grads, &mut state, hp.learning_rate)?;
        }
        let cache = forward(&model, &data.features)?;
        let stats = EpochStats {
            loss: loss_ce(cache.probs(), &data.labels)?,
            accuracy: accuracy(cache.probs(), &data.labels)?,
        };
        history.push(stats);
        if early_stop_on_fit && stats.accuracy == 1.0 {
            break;
        }
    }
    Ok((model, history))
}
