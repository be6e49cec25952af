//! Labelled datasets: synthetic Gaussian-mixture draws, IDX image files,
//! deterministic splits and subsets, and the feature statistics the
//! capacity formulas consume.

mod idx;

pub use idx::{load_idx, read_idx_images, read_idx_labels, write_idx_images, write_idx_labels, IdxImages};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Where a dataset's rows came from. Corruption ops tag their outputs
/// `Derived` so a noised training set can't be mistaken for source data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Synthetic,
    File,
    Derived,
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
    /// (rows, cols) when the features are flattened images.
    pub image_shape: Option<(usize, usize)>,
    pub provenance: Provenance,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Vec<usize>, class_count: usize) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::Data("dataset has no samples".into()));
        }
        if features.rows() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if class_count < 2 {
            return Err(Error::Data(format!("need at least 2 classes, got {class_count}")));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
            return Err(Error::Data(format!("label {bad} out of range for {class_count} classes")));
        }
        Ok(LabeledDataset {
            features,
            labels,
            class_count,
            image_shape: None,
            provenance: Provenance::Derived,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// A copy holding only the given rows, in the given order. Panics if
    /// an index is out of range, like slice indexing.
    pub fn take_rows(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            features: self.features.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            image_shape: self.image_shape,
            provenance: self.provenance,
        }
    }
}

/// Isotropic Gaussian mixture: one unit-weight component per class, shared
/// variance, explicit means.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmSpec {
    /// One mean vector per class; all the same dimension.
    pub means: Vec<Vec<f64>>,
    /// Shared isotropic variance, strictly positive.
    pub variance: f64,
    pub samples_per_class: usize,
    #[serde(default)]
    pub seed: u64,
}

impl GmmSpec {
    /// Two classes in `dim` dimensions separated along the first coordinate:
    /// means at +/-`offset` * e1, unit variance. With `offset` = 2 the
    /// Bayes-optimal accuracy is the standard normal CDF at 2, ~0.9772,
    /// independent of `dim`.
    pub fn two_class(dim: usize, offset: f64, samples_per_class: usize, seed: u64) -> Self {
        let mut plus = vec![0.0; dim];
        let mut minus = vec![0.0; dim];
        plus[0] = offset;
        minus[0] = -offset;
        GmmSpec { means: vec![minus, plus], variance: 1.0, samples_per_class, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.means.len() < 2 {
            return Err(Error::Config("GMM needs at least 2 class means".into()));
        }
        let dim = self.means[0].len();
        if dim == 0 {
            return Err(Error::Config("GMM means must have at least 1 dimension".into()));
        }
        if self.means.iter().any(|m| m.len() != dim) {
            return Err(Error::Config("GMM means have inconsistent dimensions".into()));
        }
        if !(self.variance > 0.0) || !self.variance.is_finite() {
            return Err(Error::Config(format!("GMM variance must be positive, got {}", self.variance)));
        }
        if self.samples_per_class == 0 {
            return Err(Error::Config("samples_per_class must be positive".into()));
        }
        Ok(())
    }
}

/// Draw a balanced labelled sample from the mixture and shuffle the rows.
pub fn generate_gmm(spec: &GmmSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let dim = spec.means[0].len();
    let classes = spec.means.len();
    let total = classes * spec.samples_per_class;
    let std = spec.variance.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut features = Matrix::zeros(total, dim);
    let mut labels = Vec::with_capacity(total);
    for (class, mean) in spec.means.iter().enumerate() {
        for s in 0..spec.samples_per_class {
            let r = class * spec.samples_per_class + s;
            let row = features.row_mut(r);
            for (v, mu) in row.iter_mut().zip(mean) {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v = mu + std * z;
            }
            labels.push(class);
        }
    }

    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);
    let features = features.select_rows(&order);
    let labels = order.iter().map(|&i| labels[i]).collect();

    let mut ds = LabeledDataset::new(features, labels, classes)?;
    ds.provenance = Provenance::Synthetic;
    Ok(ds)
}

/// Fractions for a train/validation/test partition. Each strictly inside
/// (0, 1); together they must sum to 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, f) in [("train", self.train), ("validation", self.validation), ("test", self.test)] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("split fraction {name}={f} must be inside (0, 1)")));
            }
        }
        let sum = self.train + self.validation + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("split fractions sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Partition sizes by largest remainder, so they always sum to `total` and
/// `(5/7, 1/7, 1/7)` of 70000 comes out exactly (50000, 10000, 10000).
fn apportion(total: usize, fractions: [f64; 3]) -> [usize; 3] {
    let mut sizes = [0usize; 3];
    let mut remainders = [(0.0f64, 0usize); 3];
    let mut assigned = 0;
    for i in 0..3 {
        let ideal = fractions[i] * total as f64;
        sizes[i] = ideal.floor() as usize;
        remainders[i] = (ideal - ideal.floor(), i);
        assigned += sizes[i];
    }
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    for k in 0..total - assigned {
        sizes[remainders[k % 3].1] += 1;
    }
    sizes
}

/// Disjoint, exhaustive, seed-deterministic train/validation/test partition.
/// Feature values are copied unchanged.
pub fn split(
    dataset: &LabeledDataset,
    spec: &SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let m = dataset.len();
    let sizes = apportion(m, [spec.train, spec.validation, spec.test]);
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::Data(format!(
            "split of {m} samples leaves an empty part (sizes {sizes:?})"
        )));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.seed));
    let train = dataset.take_rows(&order[..sizes[0]]);
    let validation = dataset.take_rows(&order[sizes[0]..sizes[0] + sizes[1]]);
    let test = dataset.take_rows(&order[sizes[0] + sizes[1]..]);
    Ok((train, validation, test))
}

/// Seed-deterministic subset of `count` samples.
pub fn subsample(dataset: &LabeledDataset, count: usize, seed: u64) -> Result<LabeledDataset> {
    if count == 0 || count > dataset.len() {
        return Err(Error::Config(format!(
            "subset of {count} from {} samples",
            dataset.len()
        )));
    }
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.truncate(count);
    Ok(dataset.take_rows(&order))
}

/// Grand mean over every feature entry (the E(X) the capacity formula uses).
pub fn mean_feature(dataset: &LabeledDataset) -> f64 {
    let n = (dataset.features.rows() * dataset.features.cols()) as f64;
    dataset.features.iter().sum::<f64>() / n
}

/// Mean of squared entries (the E(X^2) power-constraint variant).
pub fn second_moment_feature(dataset: &LabeledDataset) -> f64 {
    let n = (dataset.features.rows() * dataset.features.cols()) as f64;
    dataset.features.iter().map(|v| v * v).sum::<f64>() / n
}

/// Variance over every feature entry.
pub fn feature_variance(dataset: &LabeledDataset) -> f64 {
    let mean = mean_feature(dataset);
    second_moment_feature(dataset) - mean * mean
}

/// Min-max rescale of all entries to [0, 1], using the global minimum and
/// maximum over the whole dataset. Applying it twice is the same as once; a
/// constant dataset maps to all zeros.
pub fn normalize(dataset: &LabeledDataset) -> LabeledDataset {
    let min = dataset.features.iter().fold(f64::INFINITY, f64::min);
    let max = dataset.features.iter().fold(f64::NEG_INFINITY, f64::max);
    let scale = max - min;
    let features = if scale > 0.0 {
        dataset.features.map(|v| (v - min) / scale)
    } else {
        dataset.features.map(|_| 0.0)
    };
    LabeledDataset { features, ..dataset.clone() }
}
