//! The experiment configuration schema.
//!
//! One JSON document drives every subcommand. Unknown keys are rejected at
//! every level, so typos fail loudly instead of silently running the wrong
//! experiment. `--set key=value` overrides are applied to the raw JSON
//! before validation and therefore obey the same schema.
//!
//! A minimal config:
//!
//! ```json
//! {
//!   "dataset": { "gmm": { "dim": 10, "offset": 2.0, "samples_per_class": 500 } },
//!   "network": { "hidden": [32, 32] },
//!   "label_noise": { "kind": "symmetric", "rate": 0.8 },
//!   "feature_noise": { "kind": "gaussian", "sigma2": 1.0 },
//!   "seed": 7
//! }
//! ```
//!
//! Blocks left out take documented defaults; `label_noise` and
//! `feature_noise` default to absent (clean data).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use fnbound_core::nn::{Activation, InitScheme, TrainSchedule};
use fnbound_core::noise::{
    FeatureNoiseKind, FeatureNoiseSpec, LabelNoiseKind, LabelNoiseSpec, NoiseLevel,
};
use fnbound_core::{Error, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub network: NetworkBlock,
    #[serde(default)]
    pub schedule: TrainSchedule,
    #[serde(default)]
    pub label_noise: Option<LabelNoiseConfig>,
    #[serde(default)]
    pub feature_noise: Option<FeatureNoiseConfig>,
    #[serde(default)]
    pub evaluation: EvalConfig,
    /// Master seed; every run, noise draw, and shuffle seed derives from it.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub bound: BoundBlock,
}

/// Where the data comes from: a synthetic two-class Gaussian mixture or a
/// pair of binary image/label files.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetConfig {
    Gmm(GmmBlock),
    Idx(IdxBlock),
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmBlock {
    pub dim: usize,
    /// Class means sit at ±offset along the first coordinate.
    pub offset: f64,
    pub samples_per_class: usize,
    /// Defaults to `samples_per_class`.
    #[serde(default)]
    pub test_samples_per_class: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdxBlock {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    /// Random training subset size; the full set when absent.
    #[serde(default)]
    pub subset: Option<usize>,
}

/// Hidden layer widths plus initialization; input and output widths come
/// from the dataset.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkBlock {
    pub hidden: Vec<usize>,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    #[serde(default = "default_init")]
    pub init: InitScheme,
}

fn default_activation() -> Activation {
    Activation::Relu
}

fn default_init() -> InitScheme {
    InitScheme::He
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelNoiseConfig {
    pub kind: LabelNoiseKind,
    pub rate: f64,
}

impl LabelNoiseConfig {
    pub fn to_spec(self, seed: u64) -> LabelNoiseSpec {
        LabelNoiseSpec { kind: self.kind, rate: self.rate, seed }
    }
}

/// Feature-noise selection: the kind plus exactly one strength field —
/// the kind's own parameter (`sigma2` for gaussian, `fraction` for
/// impulse, `kernel_sigma` for gaussian_blur) or a `severity` level 1..=5.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureNoiseConfig {
    pub kind: FeatureNoiseKind,
    #[serde(default)]
    pub sigma2: Option<f64>,
    #[serde(default)]
    pub fraction: Option<f64>,
    #[serde(default)]
    pub kernel_sigma: Option<f64>,
    #[serde(default)]
    pub severity: Option<u8>,
}

impl FeatureNoiseConfig {
    pub fn to_spec(self, seed: u64) -> Result<FeatureNoiseSpec> {
        let explicit = match self.kind {
            FeatureNoiseKind::Gaussian => ("sigma2", self.sigma2),
            FeatureNoiseKind::Impulse => ("fraction", self.fraction),
            FeatureNoiseKind::GaussianBlur => ("kernel_sigma", self.kernel_sigma),
        };
        let misplaced = [
            ("sigma2", self.sigma2),
            ("fraction", self.fraction),
            ("kernel_sigma", self.kernel_sigma),
        ]
        .into_iter()
        .find(|&(name, v)| v.is_some() && name != explicit.0);
        if let Some((name, _)) = misplaced {
            return Err(Error::Config(format!(
                "feature_noise.{name} does not apply to kind {:?}; use {}",
                self.kind, explicit.0
            )));
        }
        let level = match (explicit.1, self.severity) {
            (Some(v), None) => NoiseLevel::Explicit(v),
            (None, Some(s)) => NoiseLevel::Severity(s),
            (None, None) => {
                return Err(Error::Config(format!(
                    "feature_noise needs {} or severity",
                    explicit.0
                )))
            }
            (Some(_), Some(_)) => {
                return Err(Error::Config(format!(
                    "feature_noise sets both {} and severity; pick one",
                    explicit.0
                )))
            }
        };
        let spec = FeatureNoiseSpec { kind: self.kind, level, seed };
        spec.params()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Cap on evaluation rows; a random subset is drawn when the clean
    /// test set is larger.
    pub subset: Option<usize>,
}

/// Axes for the sweep subcommands. Each command reads only the axes it
/// needs; unused ones are ignored.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    /// Gaussian feature-noise standard deviations (variance is the square).
    pub sigma: Vec<f64>,
    /// Symmetric label-corruption rates for the sigma grid.
    pub delta: Vec<f64>,
    /// Label-corruption rates for the label-kind sweep.
    pub label_delta: Vec<f64>,
    pub feature_kinds: Vec<FeatureNoiseKind>,
    /// Severity levels; 0 is the no-noise control.
    pub severities: Vec<u8>,
    pub label_kinds: Vec<LabelNoiseKind>,
    pub repeats: usize,
    /// Upper limit on cells × repeats, a guard against accidental
    /// explosions.
    pub budget: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            sigma: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            delta: vec![0.0, 0.4, 0.8],
            label_delta: vec![0.0, 0.1, 0.2, 0.3, 0.4],
            feature_kinds: vec![
                FeatureNoiseKind::Gaussian,
                FeatureNoiseKind::Impulse,
                FeatureNoiseKind::GaussianBlur,
            ],
            severities: vec![0, 1, 2, 3, 4, 5],
            label_kinds: vec![
                LabelNoiseKind::Symmetric,
                LabelNoiseKind::Pair,
                LabelNoiseKind::InstanceDependent,
            ],
            repeats: 3,
            budget: 400,
        }
    }
}

impl SweepConfig {
    /// Enforces the run budget for a command about to launch
    /// `cells * repeats` trainings.
    pub fn check_budget(&self, cells: usize) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("sweep.repeats must be at least 1".into()));
        }
        let total = cells.saturating_mul(self.repeats);
        if total > self.budget {
            return Err(Error::Config(format!(
                "sweep asks for {total} runs ({cells} cells x {} repeats), over the budget of {}",
                self.repeats, self.budget
            )));
        }
        Ok(())
    }
}

/// Ensemble size and bound parameters for the bound-curve command.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundBlock {
    pub runs: usize,
    /// Confidence parameter of the bound (not a noise rate).
    pub confidence_delta: f64,
    pub prior: PriorBlock,
    pub variance_floor: f64,
}

impl Default for BoundBlock {
    fn default() -> Self {
        BoundBlock {
            runs: 20,
            confidence_delta: 0.05,
            prior: PriorBlock::StandardNormal { lambda: 1.0 },
            variance_floor: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum PriorBlock {
    StandardNormal { lambda: f64 },
    AtInitialization { variance: f64 },
}

/// Reads, overrides, and validates a config file. Each `set` entry is a
/// `dotted.path=json_value` assignment applied before schema validation;
/// bare words that do not parse as JSON are taken as strings.
pub fn load_config(path: &Path, sets: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config is not valid JSON: {e}")))?;
    for assignment in sets {
        apply_override(&mut value, assignment)?;
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("config schema: {e}")))
}

/// Applies one `--set` assignment to the raw JSON document, creating
/// intermediate objects as needed (a `null` block becomes an object).
pub fn apply_override(root: &mut serde_json::Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set expects key=value, got {assignment:?}")))?;
    if path.is_empty() {
        return Err(Error::Config("--set key is empty".into()));
    }
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));

    let mut cursor = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, segment) in segments.iter().enumerate() {
        if cursor.is_null() {
            *cursor = serde_json::Value::Object(Default::default());
        }
        let map = cursor.as_object_mut().ok_or_else(|| {
            Error::Config(format!(
                "--set {path}: {} is not an object",
                segments[..i].join(".")
            ))
        })?;
        if i == segments.len() - 1 {
            map.insert(segment.to_string(), parsed);
            return Ok(());
        }
        cursor = map
            .entry(segment.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("split always yields at least one segment")
}
