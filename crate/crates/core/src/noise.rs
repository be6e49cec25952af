//! Controlled corruption of labels and features.
//!
//! Label side: symmetric (keep with probability 1-rate, otherwise redraw
//! uniformly over all classes, so the original can be redrawn), pair
//! (deterministic successor class), and instance-dependent (flip
//! probability tied to a fixed random projection of the features). Feature
//! side: additive Gaussian (unclipped), impulse (a chosen fraction of
//! entries forced to 0 or 1), and Gaussian blur for image-shaped data.
//!
//! Every operator takes a seed, leaves its input untouched, and returns the
//! corrupted copy along with what actually happened (flip mask, realized
//! noise matrix, realized rates) so experiments can report realized rather
//! than nominal corruption.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{LabeledDataset, Provenance};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelNoiseKind {
    Symmetric,
    Pair,
    InstanceDependent,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelNoiseSpec {
    pub kind: LabelNoiseKind,
    /// Nominal corruption rate in [0, 1].
    pub rate: f64,
    #[serde(default)]
    pub seed: u64,
}

/// A label-corruption outcome: the corrupted dataset plus per-sample
/// bookkeeping.
#[derive(Debug, Clone)]
pub struct LabelCorruption {
    pub dataset: LabeledDataset,
    /// True where the stored label now differs from the original.
    pub flip_mask: Vec<bool>,
    /// Fraction of labels that actually changed.
    pub flipped_fraction: f64,
    /// Per-sample flip probabilities (instance-dependent noise only).
    pub flip_probabilities: Option<Vec<f64>>,
}

fn check_rate(rate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
        return Err(Error::Config(format!("noise rate {rate} must be in [0, 1]")));
    }
    Ok(())
}

fn corrupted_labels(
    original: &LabeledDataset,
    labels: Vec<usize>,
    flip_probabilities: Option<Vec<f64>>,
) -> LabelCorruption {
    let flip_mask: Vec<bool> = labels
        .iter()
        .zip(&original.labels)
        .map(|(new, old)| new != old)
        .collect();
    let flipped = flip_mask.iter().filter(|&&f| f).count();
    let dataset = LabeledDataset {
        features: original.features.clone(),
        labels,
        class_count: original.class_count,
        image_shape: original.image_shape,
        provenance: Provenance::Derived,
    };
    LabelCorruption {
        flipped_fraction: flipped as f64 / original.len() as f64,
        dataset,
        flip_mask,
        flip_probabilities,
    }
}

/// With probability `rate`, replace the label by a uniform draw over all
/// classes — including its own, so the realized flip fraction concentrates
/// on `rate * (1 - 1/c)`, not `rate`.
pub fn corrupt_labels_symmetric(data: &LabeledDataset, rate: f64, seed: u64) -> Result<LabelCorruption> {
    check_rate(rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = data.class_count;
    let labels = data
        .labels
        .iter()
        .map(|&y| {
            if rng.gen::<f64>() < rate {
                rng.gen_range(0..c)
            } else {
                y
            }
        })
        .collect();
    Ok(corrupted_labels(data, labels, None))
}

/// With probability `rate`, replace class `y` by `(y + 1) mod c`.
pub fn corrupt_labels_pair(data: &LabeledDataset, rate: f64, seed: u64) -> Result<LabelCorruption> {
    check_rate(rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = data.class_count;
    let labels = data
        .labels
        .iter()
        .map(|&y| {
            if rng.gen::<f64>() < rate {
                (y + 1) % c
            } else {
                y
            }
        })
        .collect();
    Ok(corrupted_labels(data, labels, None))
}

/// Flip probability proportional to |w . x| for a fixed random direction
/// `w`, rescaled so the mean probability equals `rate` and truncated to
/// [0, 1]. Flipped samples get a uniform draw over the *other* classes, so
/// two samples with identical features share a flip probability but not
/// necessarily a flipped label.
pub fn corrupt_labels_instance_dependent(
    data: &LabeledDataset,
    rate: f64,
    seed: u64,
) -> Result<LabelCorruption> {
    check_rate(rate)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if rate == 0.0 {
        return Ok(corrupted_labels(data, data.labels.clone(), Some(vec![0.0; data.len()])));
    }
    let dim = data.feature_dim();
    let w: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
    let scores: Vec<f64> = (0..data.len())
        .map(|i| {
            data.features
                .row(i)
                .iter()
                .zip(&w)
                .map(|(x, wj)| x * wj)
                .sum::<f64>()
                .abs()
        })
        .collect();
    let mean_score = scores.iter().sum::<f64>() / scores.len() as f64;
    if mean_score == 0.0 {
        return Err(Error::Domain(
            "instance-dependent noise is degenerate: every feature projection is zero".into(),
        ));
    }
    let probs: Vec<f64> = scores.iter().map(|s| (s * rate / mean_score).min(1.0)).collect();
    let c = data.class_count;
    let labels = data
        .labels
        .iter()
        .zip(&probs)
        .map(|(&y, &p)| {
            if rng.gen::<f64>() < p {
                // Uniform over the other c-1 classes.
                let draw = rng.gen_range(0..c - 1);
                if draw >= y {
                    draw + 1
                } else {
                    draw
                }
            } else {
                y
            }
        })
        .collect();
    Ok(corrupted_labels(data, labels, Some(probs)))
}

/// Dispatch on `spec.kind`.
pub fn corrupt_labels(data: &LabeledDataset, spec: &LabelNoiseSpec) -> Result<LabelCorruption> {
    match spec.kind {
        LabelNoiseKind::Symmetric => corrupt_labels_symmetric(data, spec.rate, spec.seed),
        LabelNoiseKind::Pair => corrupt_labels_pair(data, spec.rate, spec.seed),
        LabelNoiseKind::InstanceDependent => {
            corrupt_labels_instance_dependent(data, spec.rate, spec.seed)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureNoiseKind {
    Gaussian,
    Impulse,
    GaussianBlur,
}

/// Either an explicit parameter for the chosen kind (variance for gaussian,
/// corrupted fraction for impulse, kernel sigma for blur) or a severity
/// level on the 1..=5 ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    Explicit(f64),
    Severity(u8),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureNoiseSpec {
    pub kind: FeatureNoiseKind,
    pub level: NoiseLevel,
    pub seed: u64,
}

/// Resolved per-kind parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureNoiseParams {
    Gaussian { sigma2: f64 },
    Impulse { fraction: f64 },
    GaussianBlur { kernel_sigma: f64 },
}

/// Severity ladders, indexed by level - 1. Gaussian levels are standard
/// deviations (variance is the square); impulse levels are entry fractions;
/// blur levels are kernel sigmas.
pub const GAUSSIAN_SEVERITY_SIGMA: [f64; 5] = [0.08, 0.18, 0.26, 0.38, 0.50];
pub const IMPULSE_SEVERITY_FRACTION: [f64; 5] = [0.03, 0.06, 0.09, 0.17, 0.27];
pub const BLUR_SEVERITY_KERNEL_SIGMA: [f64; 5] = [0.5, 0.75, 1.0, 1.25, 1.5];

/// Map a severity level in 1..=5 to explicit parameters for `kind`.
pub fn severity_to_params(kind: FeatureNoiseKind, level: u8) -> Result<FeatureNoiseParams> {
    if !(1..=5).contains(&level) {
        return Err(Error::Config(format!("severity level {level} outside 1..=5")));
    }
    let i = (level - 1) as usize;
    Ok(match kind {
        FeatureNoiseKind::Gaussian => {
            let sigma = GAUSSIAN_SEVERITY_SIGMA[i];
            FeatureNoiseParams::Gaussian { sigma2: sigma * sigma }
        }
        FeatureNoiseKind::Impulse => FeatureNoiseParams::Impulse { fraction: IMPULSE_SEVERITY_FRACTION[i] },
        FeatureNoiseKind::GaussianBlur => {
            FeatureNoiseParams::GaussianBlur { kernel_sigma: BLUR_SEVERITY_KERNEL_SIGMA[i] }
        }
    })
}

impl FeatureNoiseSpec {
    /// Resolve the severity ladder (or pass explicit parameters through).
    pub fn params(&self) -> Result<FeatureNoiseParams> {
        match self.level {
            NoiseLevel::Severity(level) => severity_to_params(self.kind, level),
            NoiseLevel::Explicit(v) => {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Config(format!("noise parameter {v} must be finite and >= 0")));
                }
                Ok(match self.kind {
                    FeatureNoiseKind::Gaussian => FeatureNoiseParams::Gaussian { sigma2: v },
                    FeatureNoiseKind::Impulse => {
                        if v > 1.0 {
                            return Err(Error::Config(format!("impulse fraction {v} must be in [0, 1]")));
                        }
                        FeatureNoiseParams::Impulse { fraction: v }
                    }
                    FeatureNoiseKind::GaussianBlur => {
                        if v == 0.0 {
                            return Err(Error::Config("blur kernel sigma must be positive".into()));
                        }
                        FeatureNoiseParams::GaussianBlur { kernel_sigma: v }
                    }
                })
            }
        }
    }
}

/// A feature-corruption outcome: corrupted dataset, the realized noise
/// matrix (corrupted minus original) and its empirical statistics.
#[derive(Debug, Clone)]
pub struct FeatureCorruption {
    pub dataset: LabeledDataset,
    pub noise: Matrix,
    /// Entries the operator targeted (all of them for gaussian and blur,
    /// the selected count for impulse).
    pub corrupted_entries: usize,
    pub noise_mean: f64,
    pub noise_variance: f64,
}

fn corrupted_features(original: &LabeledDataset, features: Matrix, corrupted_entries: usize) -> FeatureCorruption {
    let n = (features.rows() * features.cols()) as f64;
    let mut noise = features.clone();
    for (nv, ov) in noise.data_mut().iter_mut().zip(original.features.iter()) {
        *nv -= ov;
    }
    let mean = noise.iter().sum::<f64>() / n;
    let variance = noise.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let dataset = LabeledDataset {
        features,
        labels: original.labels.clone(),
        class_count: original.class_count,
        image_shape: original.image_shape,
        provenance: Provenance::Derived,
    };
    FeatureCorruption { dataset, noise, corrupted_entries, noise_mean: mean, noise_variance: variance }
}

/// Add i.i.d. zero-mean Gaussian noise with variance `sigma2` to every
/// entry. Values are *not* clipped back to [0, 1].
pub fn add_gaussian_feature_noise(data: &LabeledDataset, sigma2: f64, seed: u64) -> Result<FeatureCorruption> {
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::Config(format!("noise variance {sigma2} must be finite and >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std = sigma2.sqrt();
    let mut features = data.features.clone();
    if sigma2 > 0.0 {
        for v in features.data_mut() {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += std * z;
        }
    }
    let targeted = if sigma2 > 0.0 { data.len() * data.feature_dim() } else { 0 };
    Ok(corrupted_features(data, features, targeted))
}

/// Force `round(fraction * entries)` seed-chosen entries to 0 or 1 with
/// equal probability.
pub fn add_impulse_noise(data: &LabeledDataset, fraction: f64, seed: u64) -> Result<FeatureCorruption> {
    if !(0.0..=1.0).contains(&fraction) || !fraction.is_finite() {
        return Err(Error::Config(format!("impulse fraction {fraction} must be in [0, 1]")));
    }
    let total = data.len() * data.feature_dim();
    let count = (fraction * total as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..total).collect();
    indices.shuffle(&mut rng);
    indices.truncate(count);
    let mut features = data.features.clone();
    for &i in &indices {
        features.data_mut()[i] = if rng.gen_bool(0.5) { 1.0 } else { 0.0 };
    }
    Ok(corrupted_features(data, features, count))
}

/// 1-D Gaussian taps for radius `ceil(3 sigma)`, normalized to sum 1.
fn gaussian_taps(kernel_sigma: f64) -> Vec<f64> {
    let radius = (3.0 * kernel_sigma).ceil() as usize;
    let mut taps: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|j| (-((j * j) as f64) / (2.0 * kernel_sigma * kernel_sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

/// Mirror index into 0..len (edge sample included, "abc|cba").
fn mirror(i: isize, len: usize) -> usize {
    let len = len as isize;
    let j = if i < 0 {
        -i - 1
    } else if i >= len {
        2 * len - 1 - i
    } else {
        i
    };
    j as usize
}

/// Blur each row of `features` as a `height` x `width` image: separable
/// convolution with a normalized Gaussian kernel of radius
/// `ceil(3 * kernel_sigma)`, mirror-padded at the borders.
pub fn gaussian_blur_matrix(features: &Matrix, height: usize, width: usize, kernel_sigma: f64) -> Result<Matrix> {
    if !(kernel_sigma > 0.0) || !kernel_sigma.is_finite() {
        return Err(Error::Config(format!("blur kernel sigma {kernel_sigma} must be positive")));
    }
    if height * width != features.cols() {
        return Err(Error::Shape(format!(
            "{height}x{width} image does not match {} features",
            features.cols()
        )));
    }
    let taps = gaussian_taps(kernel_sigma);
    let radius = (taps.len() - 1) as isize / 2;
    if radius as usize >= height || radius as usize >= width {
        return Err(Error::Config(format!(
            "blur radius {radius} too large for a {height}x{width} image"
        )));
    }
    let mut out = features.clone();
    let mut horizontal = vec![0.0; height * width];
    let mut blurred = vec![0.0; height * width];
    for r in 0..features.rows() {
        let img = features.row(r);
        for y in 0..height {
            for x in 0..width {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    let sx = mirror(x as isize + k as isize - radius, width);
                    acc += t * img[y * width + sx];
                }
                horizontal[y * width + x] = acc;
            }
        }
        for y in 0..height {
            for x in 0..width {
                let mut acc = 0.0;
                for (k, t) in taps.iter().enumerate() {
                    let sy = mirror(y as isize + k as isize - radius, height);
                    acc += t * horizontal[sy * width + x];
                }
                blurred[y * width + x] = acc;
            }
        }
        out.row_mut(r).copy_from_slice(&blurred);
    }
    Ok(out)
}

/// Blur an image-shaped dataset (requires `image_shape`).
pub fn apply_gaussian_blur(data: &LabeledDataset, kernel_sigma: f64) -> Result<FeatureCorruption> {
    let (height, width) = data.image_shape.ok_or_else(|| {
        Error::Shape("gaussian blur needs image-shaped data (no image_shape recorded)".into())
    })?;
    let features = gaussian_blur_matrix(&data.features, height, width, kernel_sigma)?;
    let targeted = data.len() * data.feature_dim();
    Ok(corrupted_features(data, features, targeted))
}

/// Dispatch a feature-noise spec against a dataset.
pub fn apply_feature_noise(data: &LabeledDataset, spec: &FeatureNoiseSpec) -> Result<FeatureCorruption> {
    match spec.params()? {
        FeatureNoiseParams::Gaussian { sigma2 } => add_gaussian_feature_noise(data, sigma2, spec.seed),
        FeatureNoiseParams::Impulse { fraction } => add_impulse_noise(data, fraction, spec.seed),
        FeatureNoiseParams::GaussianBlur { kernel_sigma } => apply_gaussian_blur(data, kernel_sigma),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_gmm, GmmSpec};

    /// Balanced labels 0..c-1 over m samples with 1-D features.
    fn cyclic_dataset(m: usize, c: usize) -> LabeledDataset {
        let features = Matrix::from_vec(m, 1, (0..m).map(|i| i as f64 / m as f64).collect()).unwrap();
        LabeledDataset::new(features, (0..m).map(|i| i % c).collect(), c).unwrap()
    }

    #[test]
    fn symmetric_zero_rate_is_identity() {
        let data = cyclic_dataset(500, 10);
        let out = corrupt_labels_symmetric(&data, 0.0, 7).unwrap();
        assert_eq!(out.dataset.labels, data.labels);
        assert_eq!(out.flipped_fraction, 0.0);
        assert!(out.flip_mask.iter().all(|&f| !f));
    }

    #[test]
    fn symmetric_full_rate_gives_uniform_labels() {
        // chi-squared goodness of fit against uniform over 10 classes;
        // 21.666 is the 1% critical value at 9 degrees of freedom.
        let data = cyclic_dataset(100_000, 10);
        let out = corrupt_labels_symmetric(&data, 1.0, 11).unwrap();
        let mut counts = [0usize; 10];
        for &y in &out.dataset.labels {
            counts[y] += 1;
        }
        let expected = 10_000.0;
        let stat: f64 = counts
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        assert!(stat < 21.666, "chi-squared statistic {stat}");
    }

    #[test]
    fn symmetric_realized_flip_fraction_allows_self_draws() {
        // rate * (1 - 1/c) = 0.72 for rate 0.8 and 10 classes.
        let data = cyclic_dataset(100_000, 10);
        let out = corrupt_labels_symmetric(&data, 0.8, 13).unwrap();
        assert!((out.flipped_fraction - 0.72).abs() < 0.01, "{}", out.flipped_fraction);

        let mask_fraction =
            out.flip_mask.iter().filter(|&&f| f).count() as f64 / out.flip_mask.len() as f64;
        assert_eq!(mask_fraction, out.flipped_fraction);
    }

    #[test]
    fn symmetric_composition_matches_the_analytic_channel() {
        // Applying rate a then rate b is the symmetric channel at rate
        // a + b - a*b; compare realized disagreement with the original.
        let data = cyclic_dataset(100_000, 10);
        let first = corrupt_labels_symmetric(&data, 0.3, 17).unwrap();
        let second = corrupt_labels_symmetric(&first.dataset, 0.5, 19).unwrap();
        let eff = 0.3 + 0.5 - 0.3 * 0.5;
        let expected = eff * (1.0 - 0.1);
        let differing = second
            .dataset
            .labels
            .iter()
            .zip(&data.labels)
            .filter(|(a, b)| a != b)
            .count() as f64
            / data.len() as f64;
        assert!((differing - expected).abs() < 0.01, "{differing} vs {expected}");
    }

    #[test]
    fn pair_noise_flips_to_successor_only() {
        let data = cyclic_dataset(10_000, 7);
        let out = corrupt_labels_pair(&data, 0.4, 23).unwrap();
        for i in 0..data.len() {
            let (old, new) = (data.labels[i], out.dataset.labels[i]);
            assert!(new == old || new == (old + 1) % 7, "{old} -> {new}");
        }
        // Pair noise never redraws the original class, so the realized flip
        // rate concentrates on the full rate.
        assert!((out.flipped_fraction - 0.4).abs() < 0.02);

        let zero = corrupt_labels_pair(&data, 0.0, 23).unwrap();
        assert_eq!(zero.dataset.labels, data.labels);
    }

    #[test]
    fn pair_vs_symmetric_flip_rates_differ_for_two_classes() {
        // With c = 2, pair flips at the nominal rate while symmetric flips
        // at half of it (the uniform redraw lands on the original half the
        // time).
        let data = cyclic_dataset(100_000, 2);
        let pair = corrupt_labels_pair(&data, 0.6, 29).unwrap();
        let sym = corrupt_labels_symmetric(&data, 0.6, 29).unwrap();
        assert!((pair.flipped_fraction - 0.6).abs() < 0.01, "{}", pair.flipped_fraction);
        assert!((sym.flipped_fraction - 0.3).abs() < 0.01, "{}", sym.flipped_fraction);
    }

    #[test]
    fn instance_dependent_hits_the_requested_mean_rate() {
        let data = generate_gmm(&GmmSpec::two_class(10, 2.0, 5_000, 31)).unwrap();
        let out = corrupt_labels_instance_dependent(&data, 0.3, 37).unwrap();
        assert!((out.flipped_fraction - 0.3).abs() < 0.02, "{}", out.flipped_fraction);
        // Flipped labels always moved off the original class.
        for i in 0..data.len() {
            if out.flip_mask[i] {
                assert_ne!(out.dataset.labels[i], data.labels[i]);
            }
        }
        let probs = out.flip_probabilities.unwrap();
        let mean_p: f64 = probs.iter().sum::<f64>() / probs.len() as f64;
        assert!((mean_p - 0.3).abs() < 0.02, "mean probability {mean_p}");
    }

    #[test]
    fn instance_dependent_ties_probability_to_features() {
        // Duplicate every row; identical features must get identical flip
        // probabilities.
        let base = generate_gmm(&GmmSpec::two_class(4, 2.0, 50, 41)).unwrap();
        let doubled_rows: Vec<usize> = (0..base.len()).flat_map(|i| [i, i]).collect();
        let features = base.features.select_rows(&doubled_rows);
        let labels: Vec<usize> = doubled_rows.iter().map(|&i| base.labels[i]).collect();
        let data = LabeledDataset::new(features, labels, 2).unwrap();
        let out = corrupt_labels_instance_dependent(&data, 0.25, 43).unwrap();
        let probs = out.flip_probabilities.unwrap();
        for pair in probs.chunks(2) {
            assert_eq!(pair[0], pair[1]);
        }
    }

    #[test]
    fn instance_dependent_zero_rate_and_degenerate_features() {
        let data = cyclic_dataset(100, 5);
        let out = corrupt_labels_instance_dependent(&data, 0.0, 47).unwrap();
        assert_eq!(out.dataset.labels, data.labels);

        let zeros = LabeledDataset::new(Matrix::zeros(50, 3), vec![0; 25].into_iter().chain(vec![1; 25]).collect(), 2).unwrap();
        match corrupt_labels_instance_dependent(&zeros, 0.5, 53) {
            Err(Error::Domain(_)) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn label_noise_leaves_features_untouched_and_is_deterministic() {
        let data = cyclic_dataset(1_000, 10);
        let a = corrupt_labels_symmetric(&data, 0.5, 59).unwrap();
        let b = corrupt_labels_symmetric(&data, 0.5, 59).unwrap();
        let c = corrupt_labels_symmetric(&data, 0.5, 61).unwrap();
        assert_eq!(a.dataset.labels, b.dataset.labels);
        assert_ne!(a.dataset.labels, c.dataset.labels);
        assert_eq!(a.dataset.features, data.features);
        assert_eq!(a.dataset.provenance, Provenance::Derived);
    }

    #[test]
    fn gaussian_noise_statistics_match_the_requested_variance() {
        // 1000 x 1000 entries: sample variance within 3%, mean within
        // 4 sigma / sqrt(entries).
        let data = LabeledDataset::new(
            Matrix::zeros(1_000, 1_000),
            (0..1_000).map(|i| i % 2).collect(),
            2,
        )
        .unwrap();
        let sigma2 = 0.25;
        let out = add_gaussian_feature_noise(&data, sigma2, 67).unwrap();
        assert!((out.noise_variance - sigma2).abs() < 0.03 * sigma2, "{}", out.noise_variance);
        let bound = 4.0 * sigma2.sqrt() / 1_000.0;
        assert!(out.noise_mean.abs() < bound, "mean {}", out.noise_mean);
        assert_eq!(out.corrupted_entries, 1_000_000);
        // Unclipped: zeros plus noise go negative about half the time.
        assert!(out.dataset.features.iter().any(|v| v < 0.0));
    }

    #[test]
    fn gaussian_noise_zero_variance_is_identity() {
        let data = cyclic_dataset(100, 4);
        let out = add_gaussian_feature_noise(&data, 0.0, 71).unwrap();
        assert_eq!(out.dataset.features, data.features);
        assert_eq!(out.noise_variance, 0.0);
        assert_eq!(out.dataset.labels, data.labels);
    }

    #[test]
    fn impulse_noise_hits_exactly_the_rounded_count() {
        // Features strictly inside (0, 1), so every targeted entry becomes
        // visible as an exact 0 or 1.
        let data = LabeledDataset::new(
            Matrix::from_vec(100, 100, vec![0.5; 10_000]).unwrap(),
            (0..100).map(|i| i % 2).collect(),
            2,
        )
        .unwrap();
        let out = add_impulse_noise(&data, 0.09, 73).unwrap();
        assert_eq!(out.corrupted_entries, 900);
        let extreme = out
            .dataset
            .features
            .iter()
            .filter(|&v| v == 0.0 || v == 1.0)
            .count();
        assert_eq!(extreme, 900);
        let changed = out.noise.iter().filter(|&v| v != 0.0).count();
        assert_eq!(changed, 900);

        let zero = add_impulse_noise(&data, 0.0, 73).unwrap();
        assert_eq!(zero.dataset.features, data.features);
        assert_eq!(zero.corrupted_entries, 0);
    }

    /// 3x3 image dataset helper.
    fn image_dataset(pixels: Vec<f64>) -> LabeledDataset {
        let rows = pixels.len() / 9;
        let mut ds = LabeledDataset::new(
            Matrix::from_vec(rows, 9, pixels).unwrap(),
            (0..rows).map(|i| i % 2).collect(),
            2,
        )
        .unwrap();
        ds.image_shape = Some((3, 3));
        ds
    }

    #[test]
    fn blur_preserves_constant_images() {
        let data = image_dataset(vec![0.6; 18]);
        let out = apply_gaussian_blur(&data, 0.6).unwrap();
        for v in out.dataset.features.iter() {
            assert!((v - 0.6).abs() < 1e-12);
        }
    }

    #[test]
    fn blur_with_vanishing_sigma_is_identity() {
        // Radius stays 1 but the off-center taps underflow to zero.
        let data = image_dataset((0..18).map(|i| i as f64 / 18.0).collect());
        let out = apply_gaussian_blur(&data, 0.05).unwrap();
        for (a, b) in out.dataset.features.iter().zip(data.features.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn blur_of_single_pixel_impulse_is_the_kernel() {
        // 9x9 image, impulse in the middle, radius-2 kernel: the output
        // equals the normalized 2-D kernel evaluated directly.
        let mut pixels = vec![0.0; 81];
        pixels[4 * 9 + 4] = 1.0;
        let mut ds = LabeledDataset::new(
            Matrix::from_vec(2, 81, [pixels.clone(), pixels].concat()).unwrap(),
            vec![0, 1],
            2,
        )
        .unwrap();
        ds.image_shape = Some((9, 9));
        let sigma = 0.6;
        let out = apply_gaussian_blur(&ds, sigma).unwrap();

        let radius = (3.0 * sigma).ceil() as isize;
        let mut kernel = vec![0.0; 81];
        let mut total = 0.0;
        for dy in -radius..=radius {
            for dx in -radius..=radius {
                let w = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp();
                total += w;
                kernel[((4 + dy) * 9 + 4 + dx) as usize] = w;
            }
        }
        for k in &mut kernel {
            *k /= total;
        }
        for (got, want) in out.dataset.features.row(0).iter().zip(&kernel) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn blur_requires_image_shape_and_sane_radius() {
        let flat = cyclic_dataset(10, 2);
        assert!(apply_gaussian_blur(&flat, 1.0).is_err());
        let img = image_dataset(vec![0.1; 9]);
        // Radius ceil(3*2.0) = 6 exceeds a 3x3 image.
        assert!(apply_gaussian_blur(&img, 2.0).is_err());
    }

    #[test]
    fn severity_ladders_are_monotone_and_map_correctly() {
        for kind in [FeatureNoiseKind::Gaussian, FeatureNoiseKind::Impulse, FeatureNoiseKind::GaussianBlur] {
            let mut last = f64::NEG_INFINITY;
            for level in 1..=5u8 {
                let v = match severity_to_params(kind, level).unwrap() {
                    FeatureNoiseParams::Gaussian { sigma2 } => sigma2,
                    FeatureNoiseParams::Impulse { fraction } => fraction,
                    FeatureNoiseParams::GaussianBlur { kernel_sigma } => kernel_sigma,
                };
                assert!(v > last, "{kind:?} level {level} not increasing");
                last = v;
            }
        }
        assert_eq!(
            severity_to_params(FeatureNoiseKind::Gaussian, 5).unwrap(),
            FeatureNoiseParams::Gaussian { sigma2: 0.25 }
        );
        assert!(severity_to_params(FeatureNoiseKind::Gaussian, 0).is_err());
        assert!(severity_to_params(FeatureNoiseKind::Gaussian, 6).is_err());
    }

    #[test]
    fn feature_spec_dispatch_and_validation() {
        // Enough draws that the sample variance sits within a few percent
        // of the ladder value; 50 draws would fluctuate by ~20% alone.
        let data = cyclic_dataset(4000, 2);
        let spec = FeatureNoiseSpec {
            kind: FeatureNoiseKind::Gaussian,
            level: NoiseLevel::Severity(2),
            seed: 79,
        };
        let out = apply_feature_noise(&data, &spec).unwrap();
        let expect = GAUSSIAN_SEVERITY_SIGMA[1] * GAUSSIAN_SEVERITY_SIGMA[1];
        assert!((out.noise_variance - expect).abs() < 0.2 * expect);

        let bad = FeatureNoiseSpec {
            kind: FeatureNoiseKind::Impulse,
            level: NoiseLevel::Explicit(1.5),
            seed: 0,
        };
        assert!(apply_feature_noise(&data, &bad).is_err());
    }
}
