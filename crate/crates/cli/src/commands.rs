//! The seven subcommands. Each one owns a report file's schema and prints
//! a short human summary to stdout; pipelines should consume the CSV, not
//! the prose.
//!
//! Sweep commands enumerate their cells in config order and derive every
//! run's seed as `split_seed(master, cell * repeats + repeat)`, so a
//! sweep's results are invariant under `--jobs` and any result can be
//! replayed in isolation from the config alone. Rows are sorted by their
//! coordinate columns before writing, keeping files byte-comparable across
//! repository versions and worker counts.

use std::path::PathBuf;

use fnbound_core::bound::{bound_curves, collect_ensemble, make_prior, EnsembleConfig, PriorSpec, Scenario};
use fnbound_core::info::{
    bound_constraint, f_sigma2, gaussian_channel_capacity, noise_randomness_gaussian,
    optimal_sigma2, pac_bayes_bound, symmetric_conditional_entropy,
};
use fnbound_core::nn::saliency_map;
use fnbound_core::noise::{FeatureNoiseKind, FeatureNoiseSpec, LabelNoiseKind, LabelNoiseSpec, NoiseLevel};
use fnbound_core::seed::split_seed;
use fnbound_core::{Error, Result};

use crate::config::{ExperimentConfig, PriorBlock};
use crate::pipeline::{prepare, resolve_network, run_indexed, run_once};
use crate::report::{self, Series};

/// Where and how a command writes its artifacts.
#[derive(Debug, Clone)]
pub struct CommandIo {
    pub out_dir: PathBuf,
    pub jobs: usize,
    pub svg: bool,
}

impl CommandIo {
    fn file(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, (ss / (n - 1) as f64).sqrt())
}

fn label_kind_name(kind: LabelNoiseKind) -> &'static str {
    match kind {
        LabelNoiseKind::Symmetric => "symmetric",
        LabelNoiseKind::Pair => "pair",
        LabelNoiseKind::InstanceDependent => "instance_dependent",
    }
}

fn feature_kind_name(kind: FeatureNoiseKind) -> &'static str {
    match kind {
        FeatureNoiseKind::Gaussian => "gaussian",
        FeatureNoiseKind::Impulse => "impulse",
        FeatureNoiseKind::GaussianBlur => "gaussian_blur",
    }
}

fn maybe_chart(io: &CommandIo, name: &str, title: &str, x: &str, y: &str, series: &[Series]) {
    if !io.svg {
        return;
    }
    let path = io.file(name);
    match report::write_line_chart(&path, title, x, y, series) {
        Ok(()) => println!("chart: {}", path.display()),
        Err(e) => eprintln!("chart skipped ({e})"),
    }
}

/// Trains one network exactly as configured and reports its per-epoch
/// curves.
pub fn cmd_run(config: &ExperimentConfig, io: &CommandIo) -> Result<()> {
    report::ensure_dir(&io.out_dir)?;
    let data = prepare(config)?;
    let network = resolve_network(config, &data);
    let label = config.label_noise.map(|l| l.to_spec(0));
    let feature = config.feature_noise.map(|f| f.to_spec(0)).transpose()?;
    let outcome = run_once(
        &data,
        &network,
        &config.schedule,
        label.as_ref(),
        feature.as_ref(),
        split_seed(config.seed, 0),
    )?;

    let delta = label.as_ref().map_or(0.0, |l| l.rate);
    let label_name = label.as_ref().map_or("none", |l| label_kind_name(l.kind));
    let feature_name = feature.as_ref().map_or("none", |f| feature_kind_name(f.kind));
    let feature_param = feature.as_ref().map_or(0.0, |f| match f.level {
        NoiseLevel::Explicit(v) => v,
        NoiseLevel::Severity(s) => f64::from(s),
    });
    let rows: Vec<String> = outcome
        .train_loss
        .iter()
        .zip(&outcome.eval_accuracy)
        .enumerate()
        .map(|(i, (loss, acc))| {
            format!(
                "0,{},{label_name},{feature_name},{},{},{},{},{}",
                fmt(delta),
                fmt(feature_param),
                i + 1,
                fmt(*loss),
                fmt(*acc),
                config.seed
            )
        })
        .collect();
    let path = io.file("run.csv");
    report::write_csv(
        &path,
        "run,delta,label_kind,feature_kind,feature_param,epoch,train_loss,test_accuracy,seed",
        &rows,
    )?;
    maybe_chart(
        io,
        "run.svg",
        "test accuracy by epoch",
        "epoch",
        "accuracy",
        &[Series {
            name: "test accuracy".into(),
            points: outcome
                .eval_accuracy
                .iter()
                .enumerate()
                .map(|(i, &a)| ((i + 1) as f64, a))
                .collect(),
        }],
    );
    println!(
        "run: final test accuracy {:.4} after {} epochs (final train loss {:.4})",
        outcome.final_accuracy(),
        outcome.train_loss.len(),
        outcome.final_loss()
    );
    println!("table: {}", path.display());
    Ok(())
}

fn check_axis(name: &str, values: &[f64], max: Option<f64>) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Config(format!("sweep axis {name} is empty")));
    }
    for &v in values {
        let in_range = v.is_finite() && v >= 0.0 && max.is_none_or(|m| v <= m);
        if !in_range {
            return Err(Error::Config(format!("sweep axis {name} has out-of-range value {v}")));
        }
    }
    Ok(())
}

/// Accuracy over the noise-std x label-rate grid: symmetric label noise at
/// each rate, additive Gaussian feature noise at each std (0 = none).
pub fn cmd_sweep_sigma_delta(config: &ExperimentConfig, io: &CommandIo) -> Result<()> {
    let sweep = &config.sweep;
    check_axis("sigma", &sweep.sigma, None)?;
    check_axis("delta", &sweep.delta, Some(1.0))?;
    sweep.check_budget(sweep.sigma.len() * sweep.delta.len())?;
    report::ensure_dir(&io.out_dir)?;

    let data = prepare(config)?;
    let network = resolve_network(config, &data);
    let mut items = Vec::new();
    for (di, &delta) in sweep.delta.iter().enumerate() {
        for (si, &sigma) in sweep.sigma.iter().enumerate() {
            let cell = di * sweep.sigma.len() + si;
            for rep in 0..sweep.repeats {
                items.push((delta, sigma, cell * sweep.repeats + rep));
            }
        }
    }
    let accuracies = run_indexed(io.jobs, items, |_, &(delta, sigma, flat)| {
        let label = (delta > 0.0)
            .then_some(LabelNoiseSpec { kind: LabelNoiseKind::Symmetric, rate: delta, seed: 0 });
        let feature = (sigma > 0.0).then_some(FeatureNoiseSpec {
            kind: FeatureNoiseKind::Gaussian,
            level: NoiseLevel::Explicit(sigma * sigma),
            seed: 0,
        });
        run_once(
            &data,
            &network,
            &config.schedule,
            label.as_ref(),
            feature.as_ref(),
            split_seed(config.seed, flat as u64),
        )
        .map(|o| o.final_accuracy())
    })?;

    let mut cells: Vec<(f64, f64, f64, f64)> = Vec::new();
    let mut k = 0;
    for &delta in &sweep.delta {
        for &sigma in &sweep.sigma {
            let reps = &accuracies[k..k + sweep.repeats];
            let (mean, std) = mean_std(reps);
            cells.push((delta, sigma, mean, std));
            k += sweep.repeats;
        }
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let rows: Vec<String> = cells
        .iter()
        .map(|(d, s, mean, std)| {
            format!("{},{},{},{},{}", fmt(*d), fmt(*s), sweep.repeats, fmt(*mean), fmt(*std))
        })
        .collect();
    let path = io.file("sigma_delta.csv");
    report::write_csv(&path, "delta,sigma,repeats,mean_accuracy,std_accuracy", &rows)?;

    let mut deltas: Vec<f64> = cells.iter().map(|c| c.0).collect();
    deltas.dedup();
    let mut series = Vec::new();
    for &d in &deltas {
        let group: Vec<&(f64, f64, f64, f64)> = cells.iter().filter(|c| c.0 == d).collect();
        let best = group
            .iter()
            .copied()
            .max_by(|a, b| a.2.total_cmp(&b.2).then(b.1.total_cmp(&a.1)))
            .expect("every delta has at least one sigma cell");
        println!("delta {}: best sigma {} (mean accuracy {:.4})", fmt(d), fmt(best.1), best.2);
        series.push(Series {
            name: format!("delta={}", fmt(d)),
            points: group.iter().map(|c| (c.1, c.2)).collect(),
        });
    }
    maybe_chart(io, "sigma_delta.svg", "accuracy by feature-noise std", "sigma", "mean accuracy", &series);
    println!("table: {}", path.display());
    Ok(())
}

/// Accuracy across feature-noise kinds and severities (severity 0 is the
/// clean control), under the configured label noise if any.
pub fn cmd_sweep_feature_noise(config: &ExperimentConfig, io: &CommandIo) -> Result<()> {
    let sweep = &config.sweep;
    if sweep.feature_kinds.is_empty() || sweep.severities.is_empty() {
        return Err(Error::Config("sweep needs at least one feature kind and severity".into()));
    }
    if let Some(&s) = sweep.severities.iter().find(|&&s| s > 5) {
        return Err(Error::Config(format!("severity {s} is outside the 0..=5 ladder")));
    }
    sweep.check_budget(sweep.feature_kinds.len() * sweep.severities.len())?;
    report::ensure_dir(&io.out_dir)?;

    let data = prepare(config)?;
    let network = resolve_network(config, &data);
    let label = config.label_noise.map(|l| l.to_spec(0));
    let mut items = Vec::new();
    for (ki, &kind) in sweep.feature_kinds.iter().enumerate() {
        for (si, &severity) in sweep.severities.iter().enumerate() {
            let cell = ki * sweep.severities.len() + si;
            for rep in 0..sweep.repeats {
                items.push((kind, severity, cell * sweep.repeats + rep));
            }
        }
    }
    let accuracies = run_indexed(io.jobs, items, |_, &(kind, severity, flat)| {
        let feature = (severity > 0).then_some(FeatureNoiseSpec {
            kind,
            level: NoiseLevel::Severity(severity),
            seed: 0,
        });
        run_once(
            &data,
            &network,
            &config.schedule,
            label.as_ref(),
            feature.as_ref(),
            split_seed(config.seed, flat as u64),
        )
        .map(|o| o.final_accuracy())
    })?;

    let mut cells: Vec<(FeatureNoiseKind, u8, f64, f64)> = Vec::new();
    let mut k = 0;
    for &kind in &sweep.feature_kinds {
        for &severity in &sweep.severities {
            let (mean, std) = mean_std(&accuracies[k..k + sweep.repeats]);
            cells.push((kind, severity, mean, std));
            k += sweep.repeats;
        }
    }
    cells.sort_by(|a, b| {
        feature_kind_name(a.0).cmp(feature_kind_name(b.0)).then(a.1.cmp(&b.1))
    });
    let rows: Vec<String> = cells
        .iter()
        .map(|(kind, sev, mean, std)| {
            format!("{},{sev},{},{},{}", feature_kind_name(*kind), sweep.repeats, fmt(*mean), fmt(*std))
        })
        .collect();
    let path = io.file("feature_noise_types.csv");
    report::write_csv(&path, "kind,severity,repeats,mean_accuracy,std_accuracy", &rows)?;

    let mut series = Vec::new();
    let mut kinds: Vec<FeatureNoiseKind> = cells.iter().map(|c| c.0).collect();
    kinds.dedup();
    for kind in kinds {
        let group: Vec<&(FeatureNoiseKind, u8, f64, f64)> =
            cells.iter().filter(|c| c.0 == kind).collect();
        let first = group.first().expect("kind present");
        let last = group.last().expect("kind present");
        println!(
            "{}: severity {} mean accuracy {:.4}, severity {} mean accuracy {:.4}",
            feature_kind_name(kind),
            first.1,
            first.2,
            last.1,
            last.2
        );
        series.push(Series {
            name: feature_kind_name(kind).to_string(),
            points: group.iter().map(|c| (f64::from(c.1), c.2)).collect(),
        });
    }
    maybe_chart(io, "feature_noise_types.svg", "accuracy by severity", "severity", "mean accuracy", &series);
    println!("table: {}", path.display());
    Ok(())
}

/// Accuracy across label-noise kinds and rates, with and without the
/// configured feature noise on top.
pub fn cmd_sweep_label_noise(config: &ExperimentConfig, io: &CommandIo) -> Result<()> {
    let sweep = &config.sweep;
    if sweep.label_kinds.is_empty() {
        return Err(Error::Config("sweep needs at least one label-noise kind".into()));
    }
    check_axis("label_delta", &sweep.label_delta, Some(1.0))?;
    let feature = config
        .feature_noise
        .ok_or_else(|| {
            Error::Config("label-noise sweep needs a feature_noise block for its with-noise arm".into())
        })?
        .to_spec(0)?;
    sweep.check_budget(sweep.label_kinds.len() * sweep.label_delta.len() * 2)?;
    report::ensure_dir(&io.out_dir)?;

    let data = prepare(config)?;
    let network = resolve_network(config, &data);
    let mut items = Vec::new();
    for (ki, &kind) in sweep.label_kinds.iter().enumerate() {
        for (di, &delta) in sweep.label_delta.iter().enumerate() {
            for (ai, with_feature) in [false, true].into_iter().enumerate() {
                let cell = (ki * sweep.label_delta.len() + di) * 2 + ai;
                for rep in 0..sweep.repeats {
                    items.push((kind, delta, with_feature, cell * sweep.repeats + rep));
                }
            }
        }
    }
    let accuracies = run_indexed(io.jobs, items, |_, &(kind, delta, with_feature, flat)| {
        let label = (delta > 0.0).then_some(LabelNoiseSpec { kind, rate: delta, seed: 0 });
        run_once(
            &data,
            &network,
            &config.schedule,
            label.as_ref(),
            with_feature.then_some(&feature),
            split_seed(config.seed, flat as u64),
        )
        .map(|o| o.final_accuracy())
    })?;

    let mut cells: Vec<(LabelNoiseKind, f64, bool, f64, f64)> = Vec::new();
    let mut k = 0;
    for &kind in &sweep.label_kinds {
        for &delta in &sweep.label_delta {
            for with_feature in [false, true] {
                let (mean, std) = mean_std(&accuracies[k..k + sweep.repeats]);
                cells.push((kind, delta, with_feature, mean, std));
                k += sweep.repeats;
            }
        }
    }
    cells.sort_by(|a, b| {
        label_kind_name(a.0)
            .cmp(label_kind_name(b.0))
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    let rows: Vec<String> = cells
        .iter()
        .map(|(kind, delta, wf, mean, std)| {
            format!(
                "{},{},{wf},{},{},{}",
                label_kind_name(*kind),
                fmt(*delta),
                sweep.repeats,
                fmt(*mean),
                fmt(*std)
            )
        })
        .collect();
    let path = io.file("label_noise_types.csv");
    report::write_csv(&path, "kind,delta,with_feature_noise,repeats,mean_accuracy,std_accuracy", &rows)?;

    let mut series = Vec::new();
    let mut kinds: Vec<LabelNoiseKind> = cells.iter().map(|c| c.0).collect();
    kinds.dedup();
    for kind in kinds {
        for with_feature in [false, true] {
            let points: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| c.0 == kind && c.2 == with_feature)
                .map(|c| (c.1, c.3))
                .collect();
            let suffix = if with_feature { "+feature" } else { "" };
            series.push(Series {
                name: format!("{}{suffix}", label_kind_name(kind)),
                points,
            });
        }
    }
    for s in &series {
        let first = s.points.first().expect("axis checked non-empty");
        let last = s.points.last().expect("axis checked non-empty");
        println!(
            "{}: mean accuracy {:.4} at rate {} -> {:.4} at rate {}",
            s.name,
            first.1,
            fmt(first.0),
            last.1,
            fmt(last.0)
        );
    }
    maybe_chart(io, "label_noise_types.svg", "accuracy by label-noise rate", "delta", "mean accuracy", &series);
    println!("table: {}", path.display());
    Ok(())
}

/// Trains paired run ensembles for three scenarios (clean, label noise,
/// label plus feature noise) and reports each epoch's posterior divergence
/// and bound radius. The prior derives from the clean ensemble and is
/// shared by every scenario so the curves are comparable.
pub fn cmd_bound_viz(config: &ExperimentConfig, io: &CommandIo) -> Result<()> {
    let label = config
        .label_noise
        .ok_or_else(|| Error::Config("bound curves need a label_noise block".into()))?
        .to_spec(0);
    let feature = config
        .feature_noise
        .ok_or_else(|| Error::Config("bound curves need a feature_noise block".into()))?
        .to_spec(0)?;
    report::ensure_dir(&io.out_dir)?;

    let data = prepare(config)?;
    let ensemble_config = EnsembleConfig {
        runs: config.bound.runs,
        network: resolve_network(config, &data),
        schedule: config.schedule.clone(),
        master_seed: config.seed,
    };
    let scenarios = [
        Scenario::clean("clean"),
        Scenario { name: "label".into(), label_noise: Some(label), feature_noise: None },
        Scenario {
            name: "label+feature".into(),
            label_noise: Some(label),
            feature_noise: Some(feature),
        },
    ];
    let prior_spec = match config.bound.prior {
        PriorBlock::StandardNormal { lambda } => PriorSpec::StandardNormal { lambda },
        PriorBlock::AtInitialization { variance } => PriorSpec::AtInitialization { variance },
    };

    let mut reports = Vec::new();
    let mut prior = None;
    for scenario in &scenarios {
        let ensemble = collect_ensemble(&data.train, &data.test, scenario, &ensemble_config)?;
        let prior = prior.get_or_insert(make_prior(&ensemble, &prior_spec)?);
        reports.push(bound_curves(
            &ensemble,
            prior,
            config.bound.variance_floor,
            data.train.len(),
            config.bound.confidence_delta,
        )?);
    }

    let mut rows = Vec::new();
    for r in &reports {
        for i in 0..r.epochs.len() {
            rows.push(format!(
                "{},{},{},{},{},{}",
                r.scenario_name,
                r.epochs[i],
                fmt(r.kl[i]),
                fmt(r.bound[i]),
                fmt(r.mean_train_loss[i]),
                fmt(r.mean_eval_accuracy[i])
            ));
        }
    }
    let path = io.file("bound_curves.csv");
    report::write_csv(&path, "scenario,epoch,kl,bound,mean_train_loss,mean_eval_accuracy", &rows)?;

    for r in &reports {
        let last = r.epochs.len() - 1;
        println!(
            "{}: final bound {:.4} (kl {:.2}, mean eval accuracy {:.4})",
            r.scenario_name, r.bound[last], r.kl[last], r.mean_eval_accuracy[last]
        );
    }
    let series: Vec<Series> = reports
        .iter()
        .map(|r| Series {
            name: r.scenario_name.clone(),
            points: r.epochs.iter().zip(&r.bound).map(|(&e, &b)| (e as f64, b)).collect(),
        })
        .collect();
    maybe_chart(io, "bound_curves.svg", "bound radius by epoch", "epoch", "bound", &series);
    println!("table: {}", path.display());
    Ok(())
}

/// Gradient magnitude of the true-class logit for chosen test samples,
/// written both as CSV and as one PGM image per sample.
pub fn cmd_saliency(config: &ExperimentConfig, samples: &[usize], io: &CommandIo) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Config("saliency needs at least one sample index".into()));
    }
    report::ensure_dir(&io.out_dir)?;
    let data = prepare(config)?;
    for &s in samples {
        if s >= data.test.len() {
            return Err(Error::Config(format!(
                "sample {s} is out of range for a test set of {}",
                data.test.len()
            )));
        }
    }
    let network = resolve_network(config, &data);
    let label = config.label_noise.map(|l| l.to_spec(0));
    let feature = config.feature_noise.map(|f| f.to_spec(0)).transpose()?;
    let outcome = run_once(
        &data,
        &network,
        &config.schedule,
        label.as_ref(),
        feature.as_ref(),
        split_seed(config.seed, 0),
    )?;

    let (img_rows, img_cols) =
        data.test.image_shape.unwrap_or((1, data.test.feature_dim()));
    let mut rows = Vec::new();
    for &s in samples {
        let sample_label = data.test.labels[s];
        let map = saliency_map(&outcome.network, data.test.features.row(s), sample_label)?;
        for (j, v) in map.iter().enumerate() {
            rows.push(format!("{s},{sample_label},{j},{}", fmt(*v)));
        }
        let pgm = io.file(&format!("saliency_{s}.pgm"));
        report::write_pgm(&pgm, img_cols, img_rows, &report::normalize_to_bytes(&map))?;
    }
    let path = io.file("saliency.csv");
    report::write_csv(&path, "sample,label,feature_index,value", &rows)?;
    println!(
        "saliency: wrote {} map(s) as {}x{} pgm plus {}",
        samples.len(),
        img_cols,
        img_rows,
        path.display()
    );
    Ok(())
}

struct FormulaParams<'a> {
    pairs: &'a [(String, String)],
}

impl FormulaParams<'_> {
    fn raw(&self, key: &str) -> Result<&str> {
        let mut found = None;
        for (k, v) in self.pairs {
            if k == key {
                if found.is_some() {
                    return Err(Error::Config(format!("duplicate parameter {key}")));
                }
                found = Some(v.as_str());
            }
        }
        found.ok_or_else(|| Error::Config(format!("missing parameter {key}")))
    }

    fn get_f64(&self, key: &str) -> Result<f64> {
        self.raw(key)?
            .parse()
            .map_err(|_| Error::Config(format!("parameter {key} is not a number")))
    }

    fn get_usize(&self, key: &str) -> Result<usize> {
        self.raw(key)?
            .parse()
            .map_err(|_| Error::Config(format!("parameter {key} is not a whole number")))
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (k, _) in self.pairs {
            if !allowed.contains(&k.as_str()) {
                return Err(Error::Config(format!(
                    "unknown parameter {k}; expected one of {}",
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }
}

const FORMULA_NAMES: &str = "capacity, pacbayes, constraint, optsigma, fsigma2, randomness";

/// Evaluates one named closed-form quantity from `name key=value ...`
/// arguments and prints the echoed inputs plus the value.
pub fn cmd_formulas(query: &[String]) -> Result<()> {
    let (name, rest) = query
        .split_first()
        .ok_or_else(|| Error::Config(format!("formulas needs a name: {FORMULA_NAMES}")))?;
    let pairs: Vec<(String, String)> = rest
        .iter()
        .map(|arg| {
            arg.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Config(format!("expected key=value, got {arg}")))
        })
        .collect::<Result<_>>()?;
    let params = FormulaParams { pairs: &pairs };

    let (echo, value): (Vec<&str>, f64) = match name.as_str() {
        "capacity" => {
            params.reject_unknown(&["meanX", "sigma2"])?;
            let v = gaussian_channel_capacity(params.get_f64("meanX")?, params.get_f64("sigma2")?)?;
            (vec!["meanX", "sigma2"], v)
        }
        "pacbayes" => {
            params.reject_unknown(&["kl", "m", "delta"])?;
            let v = pac_bayes_bound(
                params.get_f64("kl")?,
                params.get_usize("m")?,
                params.get_f64("delta")?,
            )?;
            (vec!["kl", "m", "delta"], v)
        }
        "constraint" => {
            params.reject_unknown(&["Delta", "c", "meanX", "sigma2", "m", "delta"])?;
            let h = symmetric_conditional_entropy(params.get_f64("Delta")?, params.get_usize("c")?)?;
            let sigma2 = params.get_f64("sigma2")?;
            let cap = if sigma2 > 0.0 {
                gaussian_channel_capacity(params.get_f64("meanX")?, sigma2)?
            } else {
                params.get_f64("meanX")?;
                0.0
            };
            let v = bound_constraint(h, cap, params.get_usize("m")?, params.get_f64("delta")?)?;
            (vec!["Delta", "c", "meanX", "sigma2", "m", "delta"], v)
        }
        "optsigma" => {
            params.reject_unknown(&["meanX", "a"])?;
            let v = optimal_sigma2(params.get_f64("meanX")?, params.get_f64("a")?)?;
            (vec!["meanX", "a"], v)
        }
        "fsigma2" => {
            params.reject_unknown(&["sigma2", "meanX", "a", "m", "delta"])?;
            let v = f_sigma2(
                params.get_f64("sigma2")?,
                params.get_f64("meanX")?,
                params.get_f64("a")?,
                params.get_usize("m")?,
                params.get_f64("delta")?,
            )?;
            (vec!["sigma2", "meanX", "a", "m", "delta"], v)
        }
        "randomness" => {
            params.reject_unknown(&["varX", "sigma2"])?;
            let v = noise_randomness_gaussian(params.get_f64("varX")?, params.get_f64("sigma2")?)?;
            (vec!["varX", "sigma2"], v)
        }
        other => {
            return Err(Error::Config(format!("unknown formula {other}; expected one of {FORMULA_NAMES}")));
        }
    };

    println!("{name}");
    for key in echo {
        println!("  {key} = {}", params.raw(key)?);
    }
    println!("  value = {}", fmt(value));
    Ok(())
}
