//! Estimators for information quantities that have no closed form on real
//! data: a histogram plug-in for mutual information, a trained-probe upper
//! estimate of conditional label entropy, and the linear model tying label
//! entropy to feature-noise variance.
//!
//! These are deliberately plain estimators. The exact machinery in
//! [`super::joint`] pins down their behavior on small synthetic cases; on
//! real data they are read comparatively (more noise vs less), not as
//! unbiased point estimates.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::nn::{
    cross_entropy_loss, forward, init_network, Activation, InitScheme, NetworkConfig,
    TrainOptions, TrainSchedule,
};
use crate::seed::{split_seed, stream};

/// Plug-in mutual information (nats) between two scalar samples from an
/// equal-width 2-D histogram with `bins` cells per axis.
///
/// A constant axis resolves no information and yields exactly 0. The
/// estimate carries the usual positive plug-in bias of roughly
/// `(bins - 1)^2 / (2n)` nats, so callers should keep `n` well above
/// `bins^2`.
pub fn binned_mi_estimate(x: &[f64], y: &[f64], bins: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Estimation(format!(
            "sample lengths differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Estimation("need at least 2 paired samples".into()));
    }
    if bins < 2 {
        return Err(Error::Estimation(format!("need at least 2 bins, got {bins}")));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Estimation("samples must be finite".into()));
    }

    let range = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi - lo)
    };
    let (x_lo, x_span) = range(x);
    let (y_lo, y_span) = range(y);
    if x_span == 0.0 || y_span == 0.0 {
        return Ok(0.0);
    }
    let bin = |v: f64, lo: f64, span: f64| {
        (((v - lo) / span * bins as f64) as usize).min(bins - 1)
    };

    let mut counts = vec![0u64; bins * bins];
    for (&a, &b) in x.iter().zip(y) {
        counts[bin(a, x_lo, x_span) * bins + bin(b, y_lo, y_span)] += 1;
    }
    let n = x.len() as f64;
    let mut row = vec![0.0; bins];
    let mut col = vec![0.0; bins];
    for i in 0..bins {
        for j in 0..bins {
            let p = counts[i * bins + j] as f64 / n;
            row[i] += p;
            col[j] += p;
        }
    }
    let mut mi = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let p = counts[i * bins + j] as f64 / n;
            if p > 0.0 {
                mi += p * (p / (row[i] * col[j])).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

/// Architecture and schedule of the probe classifier used by
/// [`conditional_label_entropy_probe`].
#[derive(Debug, Clone)]
pub struct ProbeConfig {
    /// Hidden layer widths; input and output widths come from the data.
    pub hidden: Vec<usize>,
    pub schedule: TrainSchedule,
    pub seed: u64,
}

/// Upper estimate of the conditional label entropy `H(Y | X)` in nats:
/// train a small classifier on a random half of the data and report its
/// cross-entropy on the held-out half.
///
/// Any model's cross-entropy sits at or above the true conditional
/// entropy, so this probes how much label uncertainty remains once the
/// features are known — corrupt labels push it up, informative features
/// pull it down.
pub fn conditional_label_entropy_probe(data: &LabeledDataset, probe: &ProbeConfig) -> Result<f64> {
    if data.len() < 4 {
        return Err(Error::Estimation(format!(
            "need at least 4 samples to split for probing, got {}",
            data.len()
        )));
    }
    probe.schedule.validate()?;

    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed(probe.seed, stream::SUBSET));
    order.shuffle(&mut rng);
    let half = data.len() / 2;
    let fit = data.take_rows(&order[..half]);
    let held_out = data.take_rows(&order[half..]);

    let mut sizes = Vec::with_capacity(probe.hidden.len() + 2);
    sizes.push(data.feature_dim());
    sizes.extend_from_slice(&probe.hidden);
    sizes.push(data.class_count);
    let config = NetworkConfig {
        layer_sizes: sizes,
        activation: Activation::Relu,
        init: InitScheme::He,
        seed: split_seed(probe.seed, stream::INIT),
    };
    let net = init_network(&config)?;
    let (net, _) = crate::nn::train(
        net,
        &fit,
        &probe.schedule,
        split_seed(probe.seed, stream::SHUFFLE),
        &TrainOptions::default(),
    )?;

    let logits = forward(&net, &held_out.features)?;
    let (loss, _) = cross_entropy_loss(&logits, &held_out.labels)?;
    Ok(loss)
}

/// Least-squares fit of `entropy ≈ intercept + slope * sigma2`, anchored at
/// the measured `sigma2 = 0` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearEntropyModel {
    /// Nats of label entropy per unit of noise variance.
    pub slope: f64,
    /// The entropy estimate at zero noise, taken directly from the grid.
    pub intercept: f64,
    /// Root-mean-square misfit across the grid, in nats.
    pub residual: f64,
}

/// Fits [`LinearEntropyModel`] to entropy estimates along a variance grid.
///
/// The grid must contain `sigma2 = 0`; that estimate becomes the intercept
/// and the slope is least-squares through it, so the fitted line is exact
/// at the clean point by construction.
pub fn fit_linear_entropy_model(sigma2: &[f64], entropy: &[f64]) -> Result<LinearEntropyModel> {
    if sigma2.len() != entropy.len() {
        return Err(Error::Estimation(format!(
            "grid lengths differ: {} vs {}",
            sigma2.len(),
            entropy.len()
        )));
    }
    if sigma2.len() < 3 {
        return Err(Error::Estimation(format!(
            "need at least 3 grid points, got {}",
            sigma2.len()
        )));
    }
    if sigma2.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
        return Err(Error::Estimation("variances must be finite and non-negative".into()));
    }
    if entropy.iter().any(|h| !h.is_finite()) {
        return Err(Error::Estimation("entropies must be finite".into()));
    }
    let zero = sigma2
        .iter()
        .position(|&s| s == 0.0)
        .ok_or_else(|| Error::Estimation("grid must include sigma2 = 0 as the reference point".into()))?;
    let intercept = entropy[zero];

    let mut num = 0.0;
    let mut den = 0.0;
    for (&s, &h) in sigma2.iter().zip(entropy) {
        num += s * (h - intercept);
        den += s * s;
    }
    if den == 0.0 {
        return Err(Error::Estimation("all grid points sit at sigma2 = 0".into()));
    }
    let slope = num / den;

    let mse: f64 = sigma2
        .iter()
        .zip(entropy)
        .map(|(&s, &h)| {
            let miss = h - (intercept + slope * s);
            miss * miss
        })
        .sum::<f64>()
        / sigma2.len() as f64;
    Ok(LinearEntropyModel { slope, intercept, residual: mse.sqrt() })
}
