//! Property-based invariants over the public API: things that must hold
//! for *every* input, not just the worked examples in the unit tests.

use fnbound_core::data::{generate_gmm, GmmSpec};
use fnbound_core::info::{
    entropy, gaussian_channel_capacity, kl_discrete, pac_bayes_bound, DiscreteDistribution,
    SmallJoint,
};
use fnbound_core::nn::{
    flatten_weights, init_network, unflatten_weights, Activation, InitScheme, NetworkConfig,
};
use fnbound_core::noise::{corrupt_labels, LabelNoiseKind, LabelNoiseSpec};
use proptest::prelude::*;

/// Positive weights that normalize into a valid distribution; the leading
/// entry absorbs float rounding so the sum is exactly 1.
fn distribution(len: usize) -> impl Strategy<Value = DiscreteDistribution> {
    prop::collection::vec(1e-3..1.0f64, len).prop_map(|mut v| {
        let s: f64 = v.iter().sum();
        for x in &mut v {
            *x /= s;
        }
        let err = 1.0 - v.iter().sum::<f64>();
        v[0] += err;
        DiscreteDistribution::new(v).unwrap()
    })
}

proptest! {
    #[test]
    fn entropy_is_bounded_by_the_alphabet(d in (2usize..12).prop_flat_map(distribution)) {
        let h = entropy(&d);
        prop_assert!(h >= 0.0);
        prop_assert!(h <= (d.len() as f64).ln() + 1e-12);
    }

    #[test]
    fn kl_between_full_support_distributions_is_nonnegative(
        (q, p) in (2usize..10).prop_flat_map(|n| (distribution(n), distribution(n)))
    ) {
        prop_assert!(kl_discrete(&q, &p).unwrap() >= -1e-13);
    }

    #[test]
    fn capacity_grows_with_signal_and_shrinks_with_noise(
        mean_x in 0.01..5.0f64,
        sigma2 in 0.01..5.0f64,
        bump in 0.01..2.0f64,
    ) {
        let base = gaussian_channel_capacity(mean_x, sigma2).unwrap();
        prop_assert!(base > 0.0);
        prop_assert!(gaussian_channel_capacity(mean_x + bump, sigma2).unwrap() > base);
        prop_assert!(gaussian_channel_capacity(mean_x, sigma2 + bump).unwrap() < base);
    }

    #[test]
    fn bound_radius_shrinks_as_samples_grow(
        kl in 0.0..50.0f64,
        m in 2usize..100_000,
    ) {
        let here = pac_bayes_bound(kl, m, 0.05).unwrap();
        let more = pac_bayes_bound(kl, 2 * m, 0.05).unwrap();
        prop_assert!(more < here);
    }

    #[test]
    fn information_chains_never_gain_information(
        pw in prop::collection::vec(0.05..1.0f64, 3),
        px_w in prop::collection::vec(0.05..1.0f64, 3 * 4),
        py_x in prop::collection::vec(0.05..1.0f64, 4 * 3),
    ) {
        // Assemble p(w) p(x | w) p(y | x) from raw weights; from_weights
        // normalizes the product, which preserves the chain factorization.
        let mut table = Vec::with_capacity(3 * 4 * 3);
        for w in 0..3 {
            for x in 0..4 {
                let px = px_w[w * 4 + x] / px_w[w * 4..w * 4 + 4].iter().sum::<f64>();
                for y in 0..3 {
                    let py = py_x[x * 3 + y] / py_x[x * 3..x * 3 + 3].iter().sum::<f64>();
                    table.push(pw[w] * px * py);
                }
            }
        }
        let check = SmallJoint::from_weights([3, 4, 3], table).unwrap().dpi_check().unwrap();
        prop_assert!(check.i_wy <= check.i_wx + 1e-12);
        prop_assert!(check.i_wy <= check.i_xy + 1e-12);
    }

    #[test]
    fn corrupted_labels_stay_in_range(
        rate in 0.0..=1.0f64,
        seed in any::<u64>(),
        kind_pick in 0usize..3,
    ) {
        let kind = [
            LabelNoiseKind::Symmetric,
            LabelNoiseKind::Pair,
            LabelNoiseKind::InstanceDependent,
        ][kind_pick];
        let data = generate_gmm(&GmmSpec::two_class(3, 1.0, 40, 11)).unwrap();
        let spec = LabelNoiseSpec { kind, rate, seed };
        let out = corrupt_labels(&data, &spec).unwrap();
        prop_assert_eq!(out.dataset.class_count, data.class_count);
        prop_assert!(out.dataset.labels.iter().all(|&y| y < data.class_count));
        prop_assert_eq!(out.dataset.len(), data.len());
        // The mask is the ground truth for the realized fraction.
        let flipped = out.flip_mask.iter().filter(|&&f| f).count();
        prop_assert_eq!(out.flipped_fraction, flipped as f64 / data.len() as f64);
    }

    #[test]
    fn weight_flattening_round_trips(
        hidden in prop::collection::vec(1usize..6, 0..3),
        seed in any::<u64>(),
    ) {
        let mut layer_sizes = vec![3];
        layer_sizes.extend(hidden);
        layer_sizes.push(2);
        let config = NetworkConfig {
            layer_sizes,
            activation: Activation::Relu,
            init: InitScheme::He,
            seed,
        };
        let net = init_network(&config).unwrap();
        let flat = flatten_weights(&net);
        prop_assert_eq!(flat.len(), config.param_count());
        let rebuilt = unflatten_weights(&config, &flat).unwrap();
        prop_assert_eq!(flatten_weights(&rebuilt), flat);
    }
}
