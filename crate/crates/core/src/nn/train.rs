//! Minibatch SGD with momentum and a one-step learning-rate drop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::nn::{
    apply_update, backprop_from_logits, cross_entropy_loss, forward, forward_trace, flatten_weights,
    Gradients, Network,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSchedule {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr_initial: f64,
    /// 1-based epoch at which the learning rate is multiplied by
    /// `lr_drop_factor`; set it past `epochs` to never drop.
    pub lr_drop_epoch: usize,
    pub lr_drop_factor: f64,
    pub momentum: f64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        TrainSchedule {
            epochs: 30,
            batch_size: 32,
            lr_initial: 0.1,
            lr_drop_epoch: 50,
            lr_drop_factor: 0.1,
            momentum: 0.9,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.lr_initial >= 0.0) || !self.lr_initial.is_finite() {
            return Err(Error::Config(format!("lr_initial={} must be finite and >= 0", self.lr_initial)));
        }
        if !(self.lr_drop_factor > 0.0) || !self.lr_drop_factor.is_finite() {
            return Err(Error::Config(format!("lr_drop_factor={} must be positive", self.lr_drop_factor)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!("momentum={} must be in [0, 1)", self.momentum)));
        }
        Ok(())
    }

    fn lr_at(&self, epoch_1based: usize) -> f64 {
        if epoch_1based >= self.lr_drop_epoch {
            self.lr_initial * self.lr_drop_factor
        } else {
            self.lr_initial
        }
    }
}

/// What to record during training, beyond the loss curve.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrainOptions<'a> {
    /// Clean evaluation set; accuracy falls back to the training set when
    /// absent.
    pub eval: Option<&'a LabeledDataset>,
    /// Keep a flattened copy of the weights at the end of every epoch.
    pub snapshot_weights: bool,
}

/// Per-epoch curves from one training run. All vectors have length
/// `schedule.epochs`; `snapshots` is empty unless requested.
#[derive(Debug, Clone)]
pub struct TrainRecord {
    /// Mean cross-entropy (nats) over the epoch's training batches, measured
    /// before each update.
    pub train_loss: Vec<f64>,
    /// Accuracy on the evaluation set after each epoch.
    pub eval_accuracy: Vec<f64>,
    /// Flattened weights at the end of each epoch, when requested.
    pub snapshots: Vec<Vec<f64>>,
}

/// Train `net` on `data` and return the updated network with its curves.
///
/// `seed` drives batch shuffling only; weight init lives in the network and
/// noise in the dataset, so the three sources of randomness stay
/// independently reproducible. Divergence (a non-finite loss or weight)
/// aborts with the offending epoch.
pub fn train(
    net: Network,
    data: &LabeledDataset,
    schedule: &TrainSchedule,
    seed: u64,
    opts: &TrainOptions,
) -> Result<(Network, TrainRecord)> {
    schedule.validate()?;
    if data.feature_dim() != net.input_dim() {
        return Err(Error::Shape(format!(
            "dataset has {} features, network expects {}",
            data.feature_dim(),
            net.input_dim()
        )));
    }
    if data.class_count != net.output_dim() {
        return Err(Error::Shape(format!(
            "dataset has {} classes, network emits {}",
            data.class_count,
            net.output_dim()
        )));
    }
    if let Some(eval) = opts.eval {
        if eval.feature_dim() != net.input_dim() || eval.class_count != net.output_dim() {
            return Err(Error::Shape("evaluation set does not match the network".into()));
        }
    }

    let mut net = net;
    let mut velocity = Gradients::zeros_like(&net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = data.len();
    let mut order: Vec<usize> = (0..m).collect();
    let mut record = TrainRecord {
        train_loss: Vec::with_capacity(schedule.epochs),
        eval_accuracy: Vec::with_capacity(schedule.epochs),
        snapshots: Vec::new(),
    };

    for epoch in 1..=schedule.epochs {
        let lr = schedule.lr_at(epoch);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(schedule.batch_size) {
            let batch = data.features.select_rows(chunk);
            let labels: Vec<usize> = chunk.iter().map(|&i| data.labels[i]).collect();
            let step = (|| -> Result<f64> {
                let trace = forward_trace(&net, &batch)?;
                let (loss, d_logits) = cross_entropy_loss(trace.logits(), &labels)?;
                let (grads, _) = backprop_from_logits(&net, &trace, d_logits)?;
                apply_update(&mut net, &mut velocity, &grads, lr, schedule.momentum);
                Ok(loss)
            })();
            match step {
                Ok(loss) if loss.is_finite() => loss_sum += loss * chunk.len() as f64,
                Ok(loss) => {
                    return Err(Error::Training { epoch, message: format!("loss became {loss}") })
                }
                Err(e) => {
                    return Err(Error::Training { epoch, message: e.to_string() });
                }
            }
        }
        record.train_loss.push(loss_sum / m as f64);
        record.eval_accuracy.push(evaluate(&net, opts.eval.unwrap_or(data))?);
        if opts.snapshot_weights {
            record.snapshots.push(flatten_weights(&net));
        }
    }
    Ok((net, record))
}

/// Fraction of samples whose arg-max logit equals the label. Ties resolve
/// to the lowest class index.
pub fn evaluate(net: &Network, data: &LabeledDataset) -> Result<f64> {
    let logits = forward(net, &data.features)?;
    let mut correct = 0usize;
    for (r, &label) in data.labels.iter().enumerate() {
        let row = logits.row(r);
        let mut best = 0usize;
        for (c, &v) in row.iter().enumerate() {
            if v > row[best] {
                best = c;
            }
        }
        if best == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_gmm, GmmSpec, LabeledDataset, SplitSpec};
    use crate::matrix::Matrix;
    use crate::nn::{init_network, unflatten_weights, Activation, InitScheme, NetworkConfig};

    fn config(sizes: &[usize], seed: u64) -> NetworkConfig {
        NetworkConfig {
            layer_sizes: sizes.to_vec(),
            activation: Activation::Relu,
            init: InitScheme::He,
            seed,
        }
    }

    fn separated_gmm(samples_per_class: usize, seed: u64) -> LabeledDataset {
        generate_gmm(&GmmSpec::two_class(2, 2.0, samples_per_class, seed)).unwrap()
    }

    #[test]
    fn learns_a_separated_mixture() {
        let data = separated_gmm(500, 1);
        let (_, _, test) = crate::data::split(
            &data,
            &SplitSpec { train: 0.7, validation: 0.1, test: 0.2, seed: 2 },
        )
        .unwrap();
        let net = init_network(&config(&[2, 16, 2], 3)).unwrap();
        let schedule = TrainSchedule { epochs: 30, batch_size: 32, ..Default::default() };
        let opts = TrainOptions { eval: Some(&test), snapshot_weights: false };
        let (_, record) = train(net, &data, &schedule, 4, &opts).unwrap();
        let final_acc = *record.eval_accuracy.last().unwrap();
        assert!(final_acc >= 0.95, "accuracy {final_acc}");
        assert_eq!(record.train_loss.len(), 30);
        assert_eq!(record.eval_accuracy.len(), 30);
    }

    #[test]
    fn zero_learning_rate_leaves_weights_unchanged() {
        let data = separated_gmm(50, 5);
        let net = init_network(&config(&[2, 8, 2], 6)).unwrap();
        let before = flatten_weights(&net);
        let schedule = TrainSchedule {
            epochs: 3,
            lr_initial: 0.0,
            momentum: 0.0,
            ..Default::default()
        };
        let (net, _) = train(net, &data, &schedule, 7, &TrainOptions::default()).unwrap();
        assert_eq!(flatten_weights(&net), before);
    }

    #[test]
    fn training_is_deterministic_given_seeds() {
        let data = separated_gmm(100, 8);
        let schedule = TrainSchedule { epochs: 5, ..Default::default() };
        let run = || {
            let net = init_network(&config(&[2, 8, 2], 9)).unwrap();
            let (net, rec) = train(net, &data, &schedule, 10, &TrainOptions::default()).unwrap();
            (flatten_weights(&net), rec.train_loss)
        };
        let (w1, l1) = run();
        let (w2, l2) = run();
        assert_eq!(w1, w2);
        assert_eq!(l1, l2);
    }

    #[test]
    fn full_batch_descent_on_convex_model_never_increases_loss() {
        // Single linear layer + softmax is convex in the weights; plain
        // gradient descent with a small step must be monotone.
        let data = separated_gmm(100, 11);
        let net = init_network(&config(&[2, 2], 12)).unwrap();
        let schedule = TrainSchedule {
            epochs: 100,
            batch_size: 200,
            lr_initial: 0.01,
            lr_drop_epoch: 1000,
            lr_drop_factor: 1.0,
            momentum: 0.0,
        };
        let (_, record) = train(net, &data, &schedule, 13, &TrainOptions::default()).unwrap();
        for w in record.train_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "loss rose from {} to {}", w[0], w[1]);
        }
    }

    #[test]
    fn learning_rate_drop_happens_at_the_configured_epoch() {
        let s = TrainSchedule { lr_initial: 0.2, lr_drop_epoch: 3, lr_drop_factor: 0.5, ..Default::default() };
        assert_eq!(s.lr_at(1), 0.2);
        assert_eq!(s.lr_at(2), 0.2);
        assert_eq!(s.lr_at(3), 0.1);
        assert_eq!(s.lr_at(4), 0.1);
    }

    #[test]
    fn snapshots_cover_every_epoch() {
        let data = separated_gmm(40, 14);
        let cfg = config(&[2, 4, 2], 15);
        let net = init_network(&cfg).unwrap();
        let schedule = TrainSchedule { epochs: 4, ..Default::default() };
        let opts = TrainOptions { eval: None, snapshot_weights: true };
        let (_, record) = train(net, &data, &schedule, 16, &opts).unwrap();
        assert_eq!(record.snapshots.len(), 4);
        assert!(record.snapshots.iter().all(|s| s.len() == cfg.param_count()));
        // Consecutive epochs actually moved the weights.
        assert_ne!(record.snapshots[0], record.snapshots[3]);
    }

    #[test]
    fn divergence_reports_the_epoch() {
        let data = separated_gmm(50, 17);
        let net = init_network(&config(&[2, 8, 2], 18)).unwrap();
        let schedule = TrainSchedule {
            epochs: 50,
            batch_size: 16,
            lr_initial: 1e12,
            momentum: 0.0,
            ..Default::default()
        };
        match train(net, &data, &schedule, 19, &TrainOptions::default()) {
            Err(Error::Training { epoch, .. }) => assert!(epoch >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_mismatched_dataset() {
        let data = separated_gmm(20, 20);
        let net = init_network(&config(&[3, 4, 2], 21)).unwrap();
        let schedule = TrainSchedule::default();
        assert!(train(net, &data, &schedule, 22, &TrainOptions::default()).is_err());
    }

    #[test]
    fn evaluate_matches_a_naive_loop_and_breaks_ties_low() {
        // Constant zero logits: every tie resolves to class 0.
        let cfg = config(&[2, 4], 0);
        let net = unflatten_weights(&cfg, &vec![0.0; cfg.param_count()]).unwrap();
        let features = Matrix::from_vec(4, 2, vec![0.1; 8]).unwrap();
        let data = LabeledDataset::new(features, vec![0, 1, 2, 3], 4).unwrap();
        let acc = evaluate(&net, &data).unwrap();
        assert!((acc - 0.25).abs() < 1e-15);

        // A trained-ish random net agrees with an explicit argmax loop.
        let data = separated_gmm(60, 23);
        let net = init_network(&config(&[2, 6, 2], 24)).unwrap();
        let acc = evaluate(&net, &data).unwrap();
        let logits = forward(&net, &data.features).unwrap();
        let mut correct = 0;
        for i in 0..data.len() {
            let row = logits.row(i);
            let pred = if row[1] > row[0] { 1 } else { 0 };
            if pred == data.labels[i] {
                correct += 1;
            }
        }
        assert!((acc - correct as f64 / data.len() as f64).abs() < 1e-15);
    }

    #[test]
    fn evaluate_is_permutation_invariant() {
        let data = separated_gmm(60, 25);
        let net = init_network(&config(&[2, 6, 2], 26)).unwrap();
        let base = evaluate(&net, &data).unwrap();
        let permuted = crate::data::subsample(&data, data.len(), 27).unwrap();
        assert_eq!(evaluate(&net, &permuted).unwrap(), base);
    }

    #[test]
    fn perfect_margin_scores_one() {
        let cfg = config(&[2, 2], 0);
        let net = unflatten_weights(&cfg, &[10.0, 0.0, 0.0, 10.0, 0.0, 0.0]).unwrap();
        let features = Matrix::from_vec(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let data = LabeledDataset::new(features, vec![0, 1], 2).unwrap();
        assert_eq!(evaluate(&net, &data).unwrap(), 1.0);
    }
}
