//! Entropies, divergences, channel capacity, and the bound formulas built
//! from them.
//!
//! Everything is measured in nats. The closed forms here are tiny but take
//! their preconditions seriously: sample counts are at least 1, confidence
//! parameters live strictly inside (0, 1), variances are strictly positive,
//! and distributions must actually sum to 1 before they are accepted.
//!
//! The central objects:
//!
//! * `pac_bayes_bound(d, m, delta)` — `sqrt((d + ln(2 sqrt(m)/delta)) / 2m)`,
//!   the generalization-gap radius for a posterior whose divergence from the
//!   prior (or whose mutual information with the sample) is `d`.
//! * `bound_constraint(h, i, m, delta)` — the same radius with the
//!   divergence split into a label-uncertainty part `h` and a
//!   feature-information part `i`; feature noise caps `i` through
//!   [`gaussian_channel_capacity`], label noise raises `h`.
//! * [`noise_randomness_gaussian`] / [`randomness_constraint`] — the view
//!   where the cap is written as input entropy minus the conditional
//!   entropy injected by the noise channel.
//! * [`f_sigma2`] / [`optimal_sigma2`] — the bound as a function of the
//!   noise variance under a linear label-entropy model, and the variance
//!   that minimizes it.

mod estimators;
mod joint;

pub use estimators::{
    binned_mi_estimate, conditional_label_entropy_probe, fit_linear_entropy_model,
    LinearEntropyModel, ProbeConfig,
};
pub use joint::{Axis, CeDecomposition, DpiCheck, SmallJoint};

use crate::error::{Error, Result};

/// A validated probability vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution(Vec<f64>);

impl DiscreteDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain("empty distribution".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Domain("probabilities must be finite and non-negative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {sum}, expected 1")));
        }
        Ok(DiscreteDistribution(probs))
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::Domain("empty distribution".into()));
        }
        Ok(DiscreteDistribution(vec![1.0 / len as f64; len]))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(dist: &DiscreteDistribution) -> f64 {
    dist.probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// Marginal label distribution after symmetric corruption at `rate`:
/// `(1 - rate) * prior + rate * uniform`.
pub fn symmetric_noisy_label_marginal(
    prior: &DiscreteDistribution,
    rate: f64,
    classes: usize,
) -> Result<DiscreteDistribution> {
    if prior.len() != classes {
        return Err(Error::Domain(format!(
            "prior has {} entries for {classes} classes",
            prior.len()
        )));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Domain(format!("rate {rate} outside [0, 1]")));
    }
    let u = 1.0 / classes as f64;
    DiscreteDistribution::new(prior.probs().iter().map(|&p| (1.0 - rate) * p + rate * u).collect())
}

/// One row of the symmetric corruption channel: probability
/// `1 - rate + rate/c` of keeping the class, `rate/c` for each other class.
/// Its entropy is the label uncertainty the channel itself injects.
pub fn symmetric_channel_row(rate: f64, classes: usize) -> Result<DiscreteDistribution> {
    if classes < 2 {
        return Err(Error::Domain(format!("need at least 2 classes, got {classes}")));
    }
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Domain(format!("rate {rate} outside [0, 1]")));
    }
    let off = rate / classes as f64;
    let mut row = vec![off; classes];
    row[0] = 1.0 - rate + off;
    DiscreteDistribution::new(row)
}

/// Entropy (nats) of [`symmetric_channel_row`]: the conditional label
/// entropy added by symmetric corruption when the clean label is pinned.
pub fn symmetric_conditional_entropy(rate: f64, classes: usize) -> Result<f64> {
    Ok(entropy(&symmetric_channel_row(rate, classes)?))
}

/// Marginal label entropies along a grid of corruption rates.
pub fn corruption_chain_entropies(
    prior: &DiscreteDistribution,
    rates: &[f64],
    classes: usize,
) -> Result<Vec<f64>> {
    rates
        .iter()
        .map(|&r| Ok(entropy(&symmetric_noisy_label_marginal(prior, r, classes)?)))
        .collect()
}

/// KL divergence `D(q || p)` between discrete distributions, in nats.
/// Errors when `q` puts mass where `p` has none.
pub fn kl_discrete(q: &DiscreteDistribution, p: &DiscreteDistribution) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::Domain(format!("lengths differ: {} vs {}", q.len(), p.len())));
    }
    let mut kl = 0.0;
    for (&qi, &pi) in q.probs().iter().zip(p.probs()) {
        if qi > 0.0 {
            if pi == 0.0 {
                return Err(Error::Domain("q has mass outside the support of p".into()));
            }
            kl += qi * (qi / pi).ln();
        }
    }
    Ok(kl)
}

/// A diagonal Gaussian over a flattened weight vector: per-coordinate mean
/// and strictly positive variance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary {
    mean: Vec<f64>,
    variance: Vec<f64>,
}

impl GaussianSummary {
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Result<Self> {
        if mean.is_empty() || mean.len() != variance.len() {
            return Err(Error::Domain(format!(
                "mean has {} coordinates, variance {}",
                mean.len(),
                variance.len()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("mean must be finite".into()));
        }
        if variance.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Domain("variances must be finite and positive".into()));
        }
        Ok(GaussianSummary { mean, variance })
    }

    /// Zero mean, `lambda` variance in every coordinate.
    pub fn standard(dim: usize, lambda: f64) -> Result<Self> {
        GaussianSummary::new(vec![0.0; dim], vec![lambda; dim])
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }
}

/// KL divergence `D(q || p)` between diagonal Gaussians of equal dimension,
/// in nats: `1/2 sum[ ln(vp/vq) + (vq + (mq - mp)^2)/vp - 1 ]`.
pub fn kl_gaussian_diag(q: &GaussianSummary, p: &GaussianSummary) -> Result<f64> {
    if q.dim() != p.dim() {
        return Err(Error::Domain(format!("dimensions differ: {} vs {}", q.dim(), p.dim())));
    }
    let mut kl = 0.0;
    for i in 0..q.dim() {
        let (mq, vq) = (q.mean[i], q.variance[i]);
        let (mp, vp) = (p.mean[i], p.variance[i]);
        kl += (vp / vq).ln() + (vq + (mq - mp) * (mq - mp)) / vp - 1.0;
    }
    Ok(0.5 * kl)
}

fn check_m_delta(m: usize, delta: f64) -> Result<()> {
    if m == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta {delta} outside (0, 1)")));
    }
    Ok(())
}

fn log_term(m: usize, delta: f64) -> f64 {
    (2.0 * (m as f64).sqrt() / delta).ln()
}

/// Capacity (nats) of an additive Gaussian channel with noise variance
/// `sigma2` under the input constraint `mean_x`:
/// `1/2 ln(1 + mean_x / sigma2)`.
///
/// `mean_x` here is the raw first moment of the input, matching how the
/// feature-side information cap is computed elsewhere in this crate; see
/// [`gaussian_channel_capacity_power`] for the usual second-moment form.
pub fn gaussian_channel_capacity(mean_x: f64, sigma2: f64) -> Result<f64> {
    if !(mean_x >= 0.0) || !mean_x.is_finite() {
        return Err(Error::Domain(format!("mean_x {mean_x} must be finite and >= 0")));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 {sigma2} must be finite and positive")));
    }
    Ok(0.5 * (1.0 + mean_x / sigma2).ln())
}

/// Same formula with a second-moment (power) constraint in the numerator.
pub fn gaussian_channel_capacity_power(second_moment: f64, sigma2: f64) -> Result<f64> {
    gaussian_channel_capacity(second_moment, sigma2)
}

/// Generalization-gap radius `sqrt((d + ln(2 sqrt(m)/delta)) / (2m))` for a
/// divergence-or-information value `d >= 0`.
pub fn pac_bayes_bound(kl_or_mi: f64, m: usize, delta: f64) -> Result<f64> {
    check_m_delta(m, delta)?;
    if !(kl_or_mi >= 0.0) || !kl_or_mi.is_finite() {
        return Err(Error::Domain(format!("divergence {kl_or_mi} must be finite and >= 0")));
    }
    Ok(((kl_or_mi + log_term(m, delta)) / (2.0 * m as f64)).sqrt())
}

/// The radius with the information term split into label uncertainty
/// `h_y_given_x` plus feature information `i_wx_term` (typically a channel
/// capacity).
pub fn bound_constraint(h_y_given_x: f64, i_wx_term: f64, m: usize, delta: f64) -> Result<f64> {
    if !(h_y_given_x >= 0.0) || !h_y_given_x.is_finite() {
        return Err(Error::Domain(format!("entropy term {h_y_given_x} must be finite and >= 0")));
    }
    if !(i_wx_term >= 0.0) || !i_wx_term.is_finite() {
        return Err(Error::Domain(format!("information term {i_wx_term} must be finite and >= 0")));
    }
    pac_bayes_bound(h_y_given_x + i_wx_term, m, delta)
}

/// Conditional differential entropy `h(X | X + Z)` (nats) when `X` and the
/// independent noise `Z` are Gaussian with variances `var_x` and `sigma2`:
/// `1/2 ln(2 pi e * var_x sigma2 / (var_x + sigma2))`.
///
/// This is the "randomness" a Gaussian noise channel injects; it can be
/// negative (differential entropy) as `sigma2` shrinks.
pub fn noise_randomness_gaussian(var_x: f64, sigma2: f64) -> Result<f64> {
    if !(var_x > 0.0) || !var_x.is_finite() {
        return Err(Error::Domain(format!("var_x {var_x} must be finite and positive")));
    }
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 {sigma2} must be finite and positive")));
    }
    let tau = std::f64::consts::TAU;
    Ok(0.5 * (tau * std::f64::consts::E * var_x * sigma2 / (var_x + sigma2)).ln())
}

/// The radius with the feature-information cap written as input entropy
/// minus injected randomness, floored at zero:
/// `sqrt((h + max(0, h_x - r_k) + ln(2 sqrt(m)/delta)) / (2m))`.
///
/// Larger `r_k` (a more random channel) can only tighten the result.
pub fn randomness_constraint(h_y_given_x: f64, h_x: f64, r_k: f64, m: usize, delta: f64) -> Result<f64> {
    if !h_x.is_finite() || !r_k.is_finite() {
        return Err(Error::Domain("entropy arguments must be finite".into()));
    }
    bound_constraint(h_y_given_x, (h_x - r_k).max(0.0), m, delta)
}

/// The bound radius as a function of the noise variance when the label
/// uncertainty grows linearly with it (`h = slope * sigma2`):
/// `sqrt((slope sigma2 + ln((1 + mean_x/sigma2)^(1/2) * 2 sqrt(m)/delta)) / (2m))`.
pub fn f_sigma2(sigma2: f64, mean_x: f64, slope: f64, m: usize, delta: f64) -> Result<f64> {
    check_m_delta(m, delta)?;
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::Domain(format!("sigma2 {sigma2} must be finite and positive")));
    }
    if !(mean_x >= 0.0) || !mean_x.is_finite() {
        return Err(Error::Domain(format!("mean_x {mean_x} must be finite and >= 0")));
    }
    if !(slope >= 0.0) || !slope.is_finite() {
        return Err(Error::Domain(format!("slope {slope} must be finite and >= 0")));
    }
    let inner = slope * sigma2 + 0.5 * (1.0 + mean_x / sigma2).ln() + log_term(m, delta);
    Ok((inner / (2.0 * m as f64)).sqrt())
}

/// Minimizer of [`f_sigma2`] in closed form:
/// `1/2 (sqrt(mean_x^2 + 2 mean_x / slope) - mean_x)`. Zero when `mean_x`
/// is zero (the capacity term vanishes and the optimum collapses).
pub fn optimal_sigma2(mean_x: f64, slope: f64) -> Result<f64> {
    if !(mean_x >= 0.0) || !mean_x.is_finite() {
        return Err(Error::Domain(format!("mean_x {mean_x} must be finite and >= 0")));
    }
    if !(slope > 0.0) || !slope.is_finite() {
        return Err(Error::Domain(format!("slope {slope} must be finite and positive")));
    }
    Ok(0.5 * ((mean_x * mean_x + 2.0 * mean_x / slope).sqrt() - mean_x))
}

/// Bundle of everything the bound formulas consume, for callers that carry
/// the quantities around together (the CLI's formula printer does).
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs {
    pub m: usize,
    pub delta: f64,
    /// Divergence (or mutual-information) value for [`Self::pac_bayes`].
    pub kl_or_mi: f64,
    /// Label-uncertainty term for [`Self::constraint`].
    pub h_y_given_x: f64,
    /// Feature-information cap for [`Self::constraint`].
    pub capacity: f64,
}

impl BoundInputs {
    pub fn pac_bayes(&self) -> Result<f64> {
        pac_bayes_bound(self.kl_or_mi, self.m, self.delta)
    }

    pub fn constraint(&self) -> Result<f64> {
        bound_constraint(self.h_y_given_x, self.capacity, self.m, self.delta)
    }
}
