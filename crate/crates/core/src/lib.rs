//! A desk-scale laboratory for watching how label noise and feature noise
//! shape what a small classifier can generalize.
//!
//! The crate trains tiny fully-connected networks with hand-written
//! backpropagation, corrupts labels and features in controlled ways,
//! measures entropies / divergences / channel capacities by direct
//! summation or closed form, and turns ensembles of training runs into
//! PAC-Bayes-style bound curves. Everything is deterministic given a seed
//! and small enough to run on one core.
//!
//! Module map:
//! * [`nn`] — networks, exact gradients, training, saliency maps
//! * [`data`] — Gaussian-mixture draws, IDX files, splits, feature stats
//! * [`noise`] — label corruption (symmetric / pair / instance-dependent)
//!   and feature corruption (additive Gaussian / impulse / blur)
//! * [`info`] — entropies, KL divergences, channel capacity, bound
//!   formulas, small exhaustively-summed joints, estimators
//! * [`bound`] — run ensembles, diagonal Gaussian posteriors, bound curves

pub mod bound;
pub mod data;
pub mod error;
pub mod info;
pub mod matrix;
pub mod nn;
pub mod noise;
pub mod seed;

pub use error::{Error, Result};
pub use matrix::Matrix;
