//! Small fully-connected classifiers with hand-written backpropagation.
//!
//! Everything is plain `f64` and plain loops: forward, softmax
//! cross-entropy, exact reverse-mode gradients, input-gradient saliency, and
//! flatten/unflatten between a network and a single weight vector (the
//! representation the posterior-fitting code works with). No autodiff, no
//! BLAS — gradients here are checked against central finite differences in
//! the test suite, and keeping every step explicit is the point.
//!
//! Layer `l` computes `z_l = a_{l-1} W_l^T + b_l`; hidden layers apply the
//! configured activation, the last layer emits raw logits.

mod train;

pub use train::{evaluate, train, TrainOptions, TrainRecord, TrainSchedule};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    z
                } else {
                    0.0
                }
            }
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative as a function of the pre-activation.
    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitScheme {
    /// Zero-mean Gaussian with variance 2 / fan_in.
    He,
    /// Zero-mean Gaussian with variance 2 / (fan_in + fan_out).
    Xavier,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    /// Layer widths from input to output, e.g. `[64, 32, 10]`.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub init: InitScheme,
    /// Seed for the weight draw.
    #[serde(default)]
    pub seed: u64,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.layer_sizes.len() < 2 {
            return Err(Error::Config(format!(
                "need at least input and output layer sizes, got {:?}",
                self.layer_sizes
            )));
        }
        if self.layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config("layer sizes must be positive".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Total number of weights and biases a network of this shape holds.
    pub fn param_count(&self) -> usize {
        self.layer_sizes
            .windows(2)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }
}

/// One dense layer; `weights` is (out_dim, in_dim), biases start at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    weights: Matrix,
    biases: Vec<f64>,
}

impl DenseLayer {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    activation: Activation,
    layers: Vec<DenseLayer>,
}

impl Network {
    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().out_dim()
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.rows() * l.weights.cols() + l.biases.len())
            .sum()
    }
}

/// Per-layer gradients, in the same shapes as the network's parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    fn zeros_like(net: &Network) -> Self {
        Gradients {
            weights: net
                .layers
                .iter()
                .map(|l| Matrix::zeros(l.weights.rows(), l.weights.cols()))
                .collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    /// Same layer-major ordering as [`flatten_weights`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
        out
    }
}

/// Draw a fresh network: weights per the init scheme, biases zero.
pub fn init_network(config: &NetworkConfig) -> Result<Network> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut layers = Vec::with_capacity(config.layer_sizes.len() - 1);
    for pair in config.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let std = match config.init {
            InitScheme::He => (2.0 / fan_in as f64).sqrt(),
            InitScheme::Xavier => (2.0 / (fan_in + fan_out) as f64).sqrt(),
        };
        let normal = Normal::new(0.0, std).expect("positive std");
        let data: Vec<f64> = (0..fan_in * fan_out).map(|_| normal.sample(&mut rng)).collect();
        layers.push(DenseLayer {
            weights: Matrix::from_vec(fan_out, fan_in, data)?,
            biases: vec![0.0; fan_out],
        });
    }
    Ok(Network { activation: config.activation, layers })
}

/// Pre-activations and activations kept around for the backward pass.
pub(crate) struct ForwardTrace {
    /// `activations[0]` is the input batch; `activations[l]` the output of
    /// layer `l-1` after the nonlinearity (or the raw logits for the last).
    activations: Vec<Matrix>,
    pre_activations: Vec<Matrix>,
}

impl ForwardTrace {
    pub(crate) fn logits(&self) -> &Matrix {
        self.activations.last().unwrap()
    }
}

fn check_finite(m: &Matrix, layer: usize, what: &str) -> Result<()> {
    if m.iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(Error::Numeric { layer, message: format!("{what} contains a non-finite value") })
    }
}

pub(crate) fn forward_trace(net: &Network, batch: &Matrix) -> Result<ForwardTrace> {
    if batch.cols() != net.input_dim() {
        return Err(Error::Shape(format!(
            "batch has {} features, network expects {}",
            batch.cols(),
            net.input_dim()
        )));
    }
    check_finite(batch, 0, "input batch")?;
    let depth = net.layers.len();
    let mut activations = Vec::with_capacity(depth + 1);
    let mut pre_activations = Vec::with_capacity(depth);
    activations.push(batch.clone());
    for (l, layer) in net.layers.iter().enumerate() {
        let mut z = activations[l].matmul_nt(&layer.weights);
        z.add_row_bias(&layer.biases);
        check_finite(&z, l + 1, "pre-activation")?;
        let a = if l + 1 == depth { z.clone() } else { z.map(|v| net.activation.apply(v)) };
        pre_activations.push(z);
        activations.push(a);
    }
    Ok(ForwardTrace { activations, pre_activations })
}

/// Logits for a batch (rows = samples). No softmax is applied.
pub fn forward(net: &Network, batch: &Matrix) -> Result<Matrix> {
    let mut trace = forward_trace(net, batch)?;
    Ok(trace.activations.pop().expect("trace always holds the logits"))
}

/// Row-wise softmax with max-subtraction.
pub fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    for r in 0..out.rows() {
        let row = out.row_mut(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Mean cross-entropy (nats) of softmaxed logits against integer labels,
/// plus its gradient with respect to the logits.
///
/// The loss is computed through log-sum-exp rather than `softmax().ln()`, so
/// confidently-correct rows cost ~0 instead of rounding through a
/// probability of 1. The gradient is `(softmax - onehot) / batch`.
pub fn cross_entropy_loss(logits: &Matrix, labels: &[usize]) -> Result<(f64, Matrix)> {
    if labels.len() != logits.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} logit rows",
            labels.len(),
            logits.rows()
        )));
    }
    if logits.rows() == 0 {
        return Err(Error::Data("empty batch".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= logits.cols()) {
        return Err(Error::Data(format!(
            "label {bad} out of range for {} classes",
            logits.cols()
        )));
    }
    check_finite(logits, 0, "logits")?;
    let batch = logits.rows() as f64;
    let mut grad = softmax_rows(logits);
    let mut loss = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        let row = logits.row(r);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse: f64 = row.iter().map(|&v| (v - max).exp()).sum::<f64>().ln() + max;
        loss += lse - row[y];
        let grow = grad.row_mut(r);
        grow[y] -= 1.0;
        for v in grow.iter_mut() {
            *v /= batch;
        }
    }
    Ok((loss / batch, grad))
}

/// Backpropagate an arbitrary gradient on the logits down to parameter and
/// input gradients. Shared by the loss backward pass and saliency maps.
pub(crate) fn backprop_from_logits(
    net: &Network,
    trace: &ForwardTrace,
    d_logits: Matrix,
) -> Result<(Gradients, Matrix)> {
    let mut grads = Gradients::zeros_like(net);
    let mut dz = d_logits;
    for l in (0..net.layers.len()).rev() {
        if l + 1 < net.layers.len() {
            // dz currently holds the gradient on this layer's activations;
            // fold in the nonlinearity.
            let dact = trace.pre_activations[l].map(|v| net.activation.derivative(v));
            dz.hadamard_assign(&dact);
        }
        check_finite(&dz, l + 1, "gradient")?;
        grads.weights[l] = dz.matmul_tn(&trace.activations[l]);
        grads.biases[l] = dz.column_sums();
        dz = dz.matmul_nn(&net.layers[l].weights);
    }
    check_finite(&dz, 0, "input gradient")?;
    Ok((grads, dz))
}

/// Gradients of the mean cross-entropy loss for a labelled batch, together
/// with the gradient with respect to the inputs. Also returns the loss so
/// training does a single forward pass per step.
pub fn backward(net: &Network, batch: &Matrix, labels: &[usize]) -> Result<(f64, Gradients, Matrix)> {
    let trace = forward_trace(net, batch)?;
    let (loss, d_logits) = cross_entropy_loss(trace.logits(), labels)?;
    let (grads, d_input) = backprop_from_logits(net, &trace, d_logits)?;
    Ok((loss, grads, d_input))
}

/// Absolute input gradient of one class logit for a single sample.
///
/// The derivative is taken on the raw logit, not the softmax output, so the
/// map shows what the network's score for `class_index` responds to even
/// when the softmax has saturated.
pub fn saliency_map(net: &Network, sample: &[f64], class_index: usize) -> Result<Vec<f64>> {
    if class_index >= net.output_dim() {
        return Err(Error::Config(format!(
            "class index {class_index} out of range for {} outputs",
            net.output_dim()
        )));
    }
    let batch = Matrix::from_vec(1, sample.len(), sample.to_vec())?;
    let trace = forward_trace(net, &batch)?;
    let mut d_logits = Matrix::zeros(1, net.output_dim());
    d_logits.set(0, class_index, 1.0);
    let (_, d_input) = backprop_from_logits(net, &trace, d_logits)?;
    Ok(d_input.row(0).iter().map(|v| v.abs()).collect())
}

/// All parameters as one vector: for each layer, row-major weights followed
/// by biases.
pub fn flatten_weights(net: &Network) -> Vec<f64> {
    let mut out = Vec::with_capacity(net.param_count());
    for layer in &net.layers {
        out.extend_from_slice(layer.weights.data());
        out.extend_from_slice(&layer.biases);
    }
    out
}

/// Rebuild a network of `config`'s shape from a flat parameter vector.
pub fn unflatten_weights(config: &NetworkConfig, flat: &[f64]) -> Result<Network> {
    config.validate()?;
    if flat.len() != config.param_count() {
        return Err(Error::Shape(format!(
            "flat vector has {} entries, shape {:?} needs {}",
            flat.len(),
            config.layer_sizes,
            config.param_count()
        )));
    }
    let mut layers = Vec::new();
    let mut offset = 0;
    for pair in config.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let w_len = fan_in * fan_out;
        let weights = Matrix::from_vec(fan_out, fan_in, flat[offset..offset + w_len].to_vec())?;
        offset += w_len;
        let biases = flat[offset..offset + fan_out].to_vec();
        offset += fan_out;
        layers.push(DenseLayer { weights, biases });
    }
    Ok(Network { activation: config.activation, layers })
}

pub(crate) fn apply_update(net: &mut Network, velocity: &mut Gradients, grads: &Gradients, lr: f64, momentum: f64) {
    for (l, layer) in net.layers.iter_mut().enumerate() {
        let vw = velocity.weights[l].data_mut();
        let gw = grads.weights[l].data();
        for (w, (v, g)) in layer.weights.data_mut().iter_mut().zip(vw.iter_mut().zip(gw)) {
            *v = momentum * *v - lr * g;
            *w += *v;
        }
        let vb = &mut velocity.biases[l];
        let gb = &grads.biases[l];
        for (b, (v, g)) in layer.biases.iter_mut().zip(vb.iter_mut().zip(gb)) {
            *v = momentum * *v - lr * g;
            *b += *v;
        }
    }
}
