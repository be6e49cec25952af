//! Empirical generalization-bound curves from ensembles of trained
//! networks.
//!
//! The pipeline: train the same architecture `runs` times on independently
//! re-noised copies of a training set, snapshot the flattened weights after
//! every epoch, summarize each epoch's ensemble as a diagonal Gaussian
//! posterior, and turn its divergence from a fixed prior into the
//! generalization-gap radius via [`crate::info::pac_bayes_bound`].
//!
//! Noise is redrawn per run on purpose: the ensemble spread — and with it
//! the posterior variance and the divergence — reflects exactly the
//! randomness the corruption injects. Evaluation always happens on the
//! clean held-out set, so the accuracy curves measure generalization, not
//! fit to corrupted labels.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::info::{kl_gaussian_diag, pac_bayes_bound, GaussianSummary};
use crate::nn::{init_network, train, NetworkConfig, TrainOptions, TrainSchedule};
use crate::noise::{apply_feature_noise, corrupt_labels, FeatureNoiseSpec, LabelNoiseSpec};
use crate::seed::{split_seed, stream};

/// What happens to the training data before each run: nothing, label
/// corruption, feature corruption, or both.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub label_noise: Option<LabelNoiseSpec>,
    pub feature_noise: Option<FeatureNoiseSpec>,
}

impl Scenario {
    pub fn clean(name: impl Into<String>) -> Self {
        Scenario { name: name.into(), label_noise: None, feature_noise: None }
    }

    pub fn is_clean(&self) -> bool {
        self.label_noise.is_none() && self.feature_noise.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::Config("scenario name is empty".into()));
        }
        if let Some(spec) = &self.feature_noise {
            spec.params()?;
        }
        Ok(())
    }
}

/// How many runs to train and with what architecture and schedule. The
/// per-run seeds for noise, initialization, and batch shuffling are all
/// derived from `master_seed`, so an ensemble is reproducible end to end.
#[derive(Debug, Clone)]
pub struct EnsembleConfig {
    pub runs: usize,
    pub network: NetworkConfig,
    pub schedule: TrainSchedule,
    pub master_seed: u64,
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs < 2 {
            return Err(Error::Config(format!(
                "need at least 2 runs to estimate a posterior, got {}",
                self.runs
            )));
        }
        self.network.validate()?;
        self.schedule.validate()
    }
}

/// Everything an ensemble produced: per-run, per-epoch weight snapshots
/// and learning curves, plus the weights each run started from.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub scenario_name: String,
    pub param_count: usize,
    /// `snapshots[run][epoch]` is the flattened weight vector after that
    /// epoch.
    pub snapshots: Vec<Vec<Vec<f64>>>,
    /// `train_loss[run][epoch]`, measured on the (possibly corrupted)
    /// training data each run actually saw.
    pub train_loss: Vec<Vec<f64>>,
    /// `eval_accuracy[run][epoch]`, always measured on the clean held-out
    /// set.
    pub eval_accuracy: Vec<Vec<f64>>,
    /// `initial_weights[run]`: the flattened weights at initialization.
    pub initial_weights: Vec<Vec<f64>>,
}

impl EnsembleRun {
    pub fn runs(&self) -> usize {
        self.snapshots.len()
    }

    pub fn epochs(&self) -> usize {
        self.snapshots.first().map_or(0, Vec::len)
    }
}

/// Trains `config.runs` networks on independently corrupted copies of
/// `train`, evaluating each epoch against the clean `eval` set.
pub fn collect_ensemble(
    train_data: &LabeledDataset,
    eval: &LabeledDataset,
    scenario: &Scenario,
    config: &EnsembleConfig,
) -> Result<EnsembleRun> {
    scenario.validate()?;
    config.validate()?;
    if config.network.layer_sizes.first() != Some(&train_data.feature_dim()) {
        return Err(Error::Config(format!(
            "network expects {:?} inputs but the data has {} features",
            config.network.layer_sizes.first(),
            train_data.feature_dim()
        )));
    }

    let mut out = EnsembleRun {
        scenario_name: scenario.name.clone(),
        param_count: config.network.param_count(),
        snapshots: Vec::with_capacity(config.runs),
        train_loss: Vec::with_capacity(config.runs),
        eval_accuracy: Vec::with_capacity(config.runs),
        initial_weights: Vec::with_capacity(config.runs),
    };

    for run in 0..config.runs {
        let run_seed = split_seed(config.master_seed, run as u64);

        let mut seen = train_data.clone();
        if let Some(spec) = scenario.label_noise {
            let spec = LabelNoiseSpec { seed: split_seed(run_seed, stream::LABEL_NOISE), ..spec };
            seen = corrupt_labels(&seen, &spec)?.dataset;
        }
        if let Some(spec) = scenario.feature_noise {
            let spec =
                FeatureNoiseSpec { seed: split_seed(run_seed, stream::FEATURE_NOISE), ..spec };
            seen = apply_feature_noise(&seen, &spec)?.dataset;
        }

        let net_config = NetworkConfig {
            seed: split_seed(run_seed, stream::INIT),
            ..config.network.clone()
        };
        let net = init_network(&net_config)?;
        out.initial_weights.push(crate::nn::flatten_weights(&net));

        let (_, record) = train(
            net,
            &seen,
            &config.schedule,
            split_seed(run_seed, stream::SHUFFLE),
            &TrainOptions { eval: Some(eval), snapshot_weights: true },
        )?;
        out.snapshots.push(record.snapshots);
        out.train_loss.push(record.train_loss);
        out.eval_accuracy.push(record.eval_accuracy);
    }
    Ok(out)
}

/// Summarizes the ensemble at one epoch as a diagonal Gaussian: coordinate
/// means across runs and unbiased variances, floored at `variance_floor`
/// so coordinates the runs agree on exactly stay usable in divergences.
pub fn fit_gaussian_posterior(
    ensemble: &EnsembleRun,
    epoch_index: usize,
    variance_floor: f64,
) -> Result<GaussianSummary> {
    let runs = ensemble.runs();
    if runs < 2 {
        return Err(Error::Estimation(format!(
            "need at least 2 runs for a variance estimate, got {runs}"
        )));
    }
    if epoch_index >= ensemble.epochs() {
        return Err(Error::Estimation(format!(
            "epoch index {epoch_index} out of range for {} epochs",
            ensemble.epochs()
        )));
    }
    if !(variance_floor > 0.0) || !variance_floor.is_finite() {
        return Err(Error::Estimation(format!(
            "variance floor {variance_floor} must be finite and positive"
        )));
    }

    let dim = ensemble.param_count;
    let mut mean = vec![0.0; dim];
    for run in &ensemble.snapshots {
        let w = &run[epoch_index];
        if w.len() != dim {
            return Err(Error::Estimation(format!(
                "snapshot has {} coordinates, expected {dim}",
                w.len()
            )));
        }
        for (m, &v) in mean.iter_mut().zip(w) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= runs as f64;
    }

    let mut variance = vec![0.0; dim];
    for run in &ensemble.snapshots {
        for ((var, &v), &m) in variance.iter_mut().zip(&run[epoch_index]).zip(&mean) {
            let d = v - m;
            *var += d * d;
        }
    }
    for var in &mut variance {
        *var = (*var / (runs - 1) as f64).max(variance_floor);
    }
    GaussianSummary::new(mean, variance)
}

/// The reference distribution the posterior is measured against. It must
/// not look at anything training produced, which is why the
/// at-initialization variant averages weights from before the first step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSpec {
    /// Zero mean, `lambda` variance in every coordinate.
    StandardNormal { lambda: f64 },
    /// Mean at the average initialization across runs, fixed `variance`.
    AtInitialization { variance: f64 },
}

pub fn make_prior(ensemble: &EnsembleRun, spec: &PriorSpec) -> Result<GaussianSummary> {
    let dim = ensemble.param_count;
    match *spec {
        PriorSpec::StandardNormal { lambda } => {
            if !(lambda > 0.0) || !lambda.is_finite() {
                return Err(Error::Domain(format!(
                    "prior variance {lambda} must be finite and positive"
                )));
            }
            GaussianSummary::standard(dim, lambda)
        }
        PriorSpec::AtInitialization { variance } => {
            if !(variance > 0.0) || !variance.is_finite() {
                return Err(Error::Domain(format!(
                    "prior variance {variance} must be finite and positive"
                )));
            }
            if ensemble.initial_weights.is_empty() {
                return Err(Error::Estimation("ensemble has no initial weights".into()));
            }
            let mut mean = vec![0.0; dim];
            for w in &ensemble.initial_weights {
                for (m, &v) in mean.iter_mut().zip(w) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= ensemble.initial_weights.len() as f64;
            }
            GaussianSummary::new(mean, vec![variance; dim])
        }
    }
}

/// Per-epoch divergence and bound radius for one ensemble against one
/// prior, with the run-averaged learning curves alongside.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub scenario_name: String,
    /// 1-based epoch numbers, matching the rows of every other field.
    pub epochs: Vec<usize>,
    pub kl: Vec<f64>,
    pub bound: Vec<f64>,
    pub mean_train_loss: Vec<f64>,
    pub mean_eval_accuracy: Vec<f64>,
}

/// Fits a posterior at every epoch and converts its divergence from
/// `prior` into a bound radius at sample size `m` and confidence `delta`.
pub fn bound_curves(
    ensemble: &EnsembleRun,
    prior: &GaussianSummary,
    variance_floor: f64,
    m: usize,
    delta: f64,
) -> Result<BoundReport> {
    if prior.dim() != ensemble.param_count {
        return Err(Error::Estimation(format!(
            "prior has {} coordinates, ensemble weights have {}",
            prior.dim(),
            ensemble.param_count
        )));
    }
    let epochs = ensemble.epochs();
    if epochs == 0 {
        return Err(Error::Estimation("ensemble holds no snapshots".into()));
    }
    let runs = ensemble.runs() as f64;

    let mut report = BoundReport {
        scenario_name: ensemble.scenario_name.clone(),
        epochs: (1..=epochs).collect(),
        kl: Vec::with_capacity(epochs),
        bound: Vec::with_capacity(epochs),
        mean_train_loss: Vec::with_capacity(epochs),
        mean_eval_accuracy: Vec::with_capacity(epochs),
    };
    for e in 0..epochs {
        let posterior = fit_gaussian_posterior(ensemble, e, variance_floor)?;
        let kl = kl_gaussian_diag(&posterior, prior)?;
        report.kl.push(kl);
        report.bound.push(pac_bayes_bound(kl, m, delta)?);
        let loss = ensemble.train_loss.iter().map(|r| r[e]).sum::<f64>() / runs;
        let acc = ensemble.eval_accuracy.iter().map(|r| r[e]).sum::<f64>() / runs;
        report.mean_train_loss.push(loss);
        report.mean_eval_accuracy.push(acc);
    }
    Ok(report)
}
