//! Dataset assembly and the single-run training primitive.
//!
//! Every command funnels through [`run_once`]: corrupt a private copy of
//! the training data, train a freshly initialized network, evaluate each
//! epoch on the clean test set. All randomness inside a run derives from
//! its `run_seed` through the crate-wide stream constants, so a run is one
//! closed, reproducible unit — sweeps just map [`run_once`] over a seed
//! grid, in parallel when asked.
//!
//! File-backed image data arrives byte-scaled into [0, 1] from the loader;
//! mixture data keeps its raw coordinates so the class geometry (and with
//! it the known achievable accuracy) stays intact. No further rescaling
//! happens here.

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use fnbound_core::data::{generate_gmm, load_idx, subsample, GmmSpec, LabeledDataset};
use fnbound_core::nn::{init_network, train, Network, NetworkConfig, TrainOptions, TrainSchedule};
use fnbound_core::noise::{apply_feature_noise, corrupt_labels, FeatureNoiseSpec, LabelNoiseSpec};
use fnbound_core::seed::{split_seed, stream};
use fnbound_core::{Error, Result};

use crate::config::{DatasetConfig, ExperimentConfig};

/// Clean train and test sets, ready for per-run corruption.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

/// Materializes the configured dataset. Deterministic in `config.seed`.
pub fn prepare(config: &ExperimentConfig) -> Result<PreparedData> {
    let dataset_seed = split_seed(config.seed, stream::DATASET);
    let (train, test) = match &config.dataset {
        DatasetConfig::Gmm(g) => {
            let train = generate_gmm(&GmmSpec::two_class(
                g.dim,
                g.offset,
                g.samples_per_class,
                split_seed(dataset_seed, 0),
            ))?;
            let test = generate_gmm(&GmmSpec::two_class(
                g.dim,
                g.offset,
                g.test_samples_per_class.unwrap_or(g.samples_per_class),
                split_seed(dataset_seed, 1),
            ))?;
            (train, test)
        }
        DatasetConfig::Idx(paths) => {
            let mut train = load_idx(&paths.train_images, &paths.train_labels)?;
            let test = load_idx(&paths.test_images, &paths.test_labels)?;
            if let Some(subset) = paths.subset {
                train = subsample(&train, subset, split_seed(dataset_seed, 2))?;
            }
            (train, test)
        }
    };
    let test = match config.evaluation.subset {
        Some(cap) if cap < test.len() => subsample(&test, cap, split_seed(dataset_seed, 3))?,
        _ => test,
    };
    Ok(PreparedData { train, test })
}

/// Fills in the input and output widths around the configured hidden
/// layers. The seed is a placeholder; [`run_once`] replaces it per run.
pub fn resolve_network(config: &ExperimentConfig, data: &PreparedData) -> NetworkConfig {
    let mut layer_sizes = Vec::with_capacity(config.network.hidden.len() + 2);
    layer_sizes.push(data.train.feature_dim());
    layer_sizes.extend_from_slice(&config.network.hidden);
    layer_sizes.push(data.train.class_count);
    NetworkConfig {
        layer_sizes,
        activation: config.network.activation,
        init: config.network.init,
        seed: 0,
    }
}

/// One training run's curves and trained model.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub network: Network,
    pub train_loss: Vec<f64>,
    pub eval_accuracy: Vec<f64>,
}

impl RunOutcome {
    pub fn final_accuracy(&self) -> f64 {
        *self.eval_accuracy.last().expect("training always runs at least one epoch")
    }

    pub fn final_loss(&self) -> f64 {
        *self.train_loss.last().expect("training always runs at least one epoch")
    }
}

/// Corrupts a private copy of the training data per the given specs (their
/// seed fields are replaced with streams derived from `run_seed`), trains
/// a freshly seeded network, and evaluates every epoch on the clean test
/// set.
pub fn run_once(
    data: &PreparedData,
    network: &NetworkConfig,
    schedule: &TrainSchedule,
    label: Option<&LabelNoiseSpec>,
    feature: Option<&FeatureNoiseSpec>,
    run_seed: u64,
) -> Result<RunOutcome> {
    let mut seen = data.train.clone();
    if let Some(spec) = label {
        let spec = LabelNoiseSpec { seed: split_seed(run_seed, stream::LABEL_NOISE), ..*spec };
        seen = corrupt_labels(&seen, &spec)?.dataset;
    }
    if let Some(spec) = feature {
        let spec = FeatureNoiseSpec { seed: split_seed(run_seed, stream::FEATURE_NOISE), ..*spec };
        seen = apply_feature_noise(&seen, &spec)?.dataset;
    }
    let net = init_network(&NetworkConfig {
        seed: split_seed(run_seed, stream::INIT),
        ..network.clone()
    })?;
    let (net, record) = train(
        net,
        &seen,
        schedule,
        split_seed(run_seed, stream::SHUFFLE),
        &TrainOptions { eval: Some(&data.test), snapshot_weights: false },
    )?;
    Ok(RunOutcome {
        network: net,
        train_loss: record.train_loss,
        eval_accuracy: record.eval_accuracy,
    })
}

/// Maps `f` over `items` with up to `jobs` worker threads, preserving item
/// order in the result. The first failure (by item index) is returned and
/// remaining work is abandoned. `jobs = 1` runs inline.
pub fn run_indexed<T, R, F>(jobs: usize, items: Vec<T>, f: F) -> Result<Vec<R>>
where
    T: Send + Sync,
    R: Send,
    F: Fn(usize, &T) -> Result<R> + Sync,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let workers = jobs.min(items.len());
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<Result<R>>>> =
        items.iter().map(|_| Mutex::new(None)).collect();

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let result = f(i, &items[i]);
                if result.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                *slots[i].lock().expect("slot mutex poisoned") = Some(result);
            });
        }
    });

    let mut out = Vec::with_capacity(items.len());
    for slot in slots {
        match slot.into_inner().expect("slot mutex poisoned") {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => return Err(e),
            // A slot can stay empty only when some other item failed.
            None => return Err(Error::Estimation("worker pool aborted early".into())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_config;
    use fnbound_core::noise::{LabelNoiseKind, NoiseLevel};
    use std::io::Write;

    fn gmm_config(extra_sets: &[&str]) -> ExperimentConfig {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(
            br#"{
                "dataset": { "gmm": { "dim": 3, "offset": 2.0, "samples_per_class": 30,
                                       "test_samples_per_class": 20 } },
                "network": { "hidden": [8] },
                "schedule": { "epochs": 3 },
                "seed": 11
            }"#,
        )
        .unwrap();
        let sets: Vec<String> = extra_sets.iter().map(|s| s.to_string()).collect();
        load_config(f.path(), &sets).unwrap()
    }

    #[test]
    fn prepare_is_deterministic_and_respects_sizes() {
        let config = gmm_config(&[]);
        let a = prepare(&config).unwrap();
        let b = prepare(&config).unwrap();
        assert_eq!(a.train.len(), 60);
        assert_eq!(a.test.len(), 40);
        assert_eq!(a.train.features.data(), b.train.features.data());
        assert_ne!(
            a.train.features.data(),
            a.test.features.data(),
            "train and test draws must differ"
        );

        let reseeded = prepare(&gmm_config(&["seed=12"])).unwrap();
        assert_ne!(a.train.features.data(), reseeded.train.features.data());
    }

    #[test]
    fn evaluation_subset_caps_the_test_set() {
        let config = gmm_config(&["evaluation.subset=10"]);
        let data = prepare(&config).unwrap();
        assert_eq!(data.test.len(), 10);
        let generous = gmm_config(&["evaluation.subset=5000"]);
        assert_eq!(prepare(&generous).unwrap().test.len(), 40);
    }

    #[test]
    fn resolved_network_brackets_the_hidden_layers() {
        let config = gmm_config(&[]);
        let data = prepare(&config).unwrap();
        let net = resolve_network(&config, &data);
        assert_eq!(net.layer_sizes, vec![3, 8, 2]);
    }

    #[test]
    fn run_once_is_deterministic_in_its_seed() {
        let config = gmm_config(&[]);
        let data = prepare(&config).unwrap();
        let net = resolve_network(&config, &data);
        let label = LabelNoiseSpec { kind: LabelNoiseKind::Symmetric, rate: 0.3, seed: 0 };
        let a = run_once(&data, &net, &config.schedule, Some(&label), None, 21).unwrap();
        let b = run_once(&data, &net, &config.schedule, Some(&label), None, 21).unwrap();
        assert_eq!(a.train_loss, b.train_loss);
        assert_eq!(a.eval_accuracy, b.eval_accuracy);
        let c = run_once(&data, &net, &config.schedule, Some(&label), None, 22).unwrap();
        assert_ne!(a.train_loss, c.train_loss);
        assert_eq!(a.train_loss.len(), 3);
        assert!(a.final_accuracy() > 0.0 && a.final_accuracy() <= 1.0);
    }

    #[test]
    fn run_once_applies_feature_noise_to_train_only() {
        let config = gmm_config(&[]);
        let data = prepare(&config).unwrap();
        let net = resolve_network(&config, &data);
        let before = data.test.features.data().to_vec();
        let feature = FeatureNoiseSpec {
            kind: fnbound_core::noise::FeatureNoiseKind::Gaussian,
            level: NoiseLevel::Explicit(1.0),
            seed: 0,
        };
        run_once(&data, &net, &config.schedule, None, Some(&feature), 31).unwrap();
        assert_eq!(data.test.features.data(), &before[..]);
    }

    #[test]
    fn worker_pool_matches_inline_execution() {
        let items: Vec<u64> = (0..17).collect();
        let inline = run_indexed(1, items.clone(), |i, &x| Ok(x * 10 + i as u64)).unwrap();
        let pooled = run_indexed(4, items, |i, &x| Ok(x * 10 + i as u64)).unwrap();
        assert_eq!(inline, pooled);
    }

    #[test]
    fn worker_pool_surfaces_failures() {
        let items: Vec<u64> = (0..8).collect();
        let err = run_indexed(3, items, |_, &x| {
            if x == 5 {
                Err(Error::Config("boom".into()))
            } else {
                Ok(x)
            }
        })
        .unwrap_err();
        assert!(err.to_string().contains("boom") || err.to_string().contains("aborted"));
    }
}
