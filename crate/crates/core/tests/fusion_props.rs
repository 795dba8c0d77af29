use claimguard::fusion::{accuracy, fit_weights, fuse, FitExample, FitOptions, FusionWeights};
use claimguard::Error;
use proptest::prelude::*;

fn weights() -> impl Strategy<Value = FusionWeights> {
    (0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, -1.0..0.0f64)
        .prop_filter("some weight", |(a, b, g, _)| a + b + g > 1e-6)
        .prop_map(|(a, b, g, bias)| FusionWeights::new(a, b, g, bias).unwrap())
}

fn toy(seed: u64) -> Vec<FitExample> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..60)
        .map(|i| {
            let label = i % 2 == 0;
            let (lo, hi) = if label { (0.6, 1.0) } else { (0.0, 0.3) };
            FitExample {
                p_causal: rng.random_range(0.0..1.0),
                p_symbolic: rng.random_range(lo..hi),
                uncertainty: rng.random_range(0.0..0.5),
                label,
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn fused_score_is_bounded_and_monotone(
        w in weights(),
        x in prop::array::uniform3(0.0..=1.0f64),
        bump in 0.0..=1.0f64,
        axis in 0..3usize,
    ) {
        let s = fuse(x[0], x[1], x[2], &w).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        let mut y = x;
        y[axis] = (y[axis] + bump).min(1.0);
        prop_assert!(fuse(y[0], y[1], y[2], &w).unwrap() >= s);
    }

    #[test]
    fn weights_text_round_trips(w in weights()) {
        let again: FusionWeights = w.to_string().parse().unwrap();
        prop_assert_eq!(again, w);
    }
}

#[test]
fn out_of_range_inputs_are_rejected() {
    let w = FusionWeights::default();
    assert!(matches!(fuse(1.5, 0.0, 0.0, &w), Err(Error::InputOutOfRange { .. })));
    assert!(matches!(fuse(0.0, -0.1, 0.0, &w), Err(Error::InputOutOfRange { .. })));
}

#[test]
fn fit_separates_toy_data_with_monotone_loss() {
    let data = toy(3);
    let fit = fit_weights(&data, FitOptions::default()).unwrap();
    assert!(fit.accuracy >= 0.99, "{}", fit.accuracy);
    assert_eq!(accuracy(&fit.weights, &data), fit.accuracy);
    assert!(fit.loss_curve.windows(2).all(|w| w[1] <= w[0]));
    let sum = fit.weights.alpha + fit.weights.beta + fit.weights.gamma;
    assert!((sum - 1.0).abs() < 1e-9);
}

#[test]
fn fit_is_seed_deterministic() {
    let data = toy(9);
    let a = fit_weights(&data, FitOptions { seed: 4, ..Default::default() }).unwrap();
    let b = fit_weights(&data, FitOptions { seed: 4, ..Default::default() }).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.loss_curve, b.loss_curve);
}

#[test]
fn degenerate_data_is_rejected() {
    let one_class: Vec<FitExample> = toy(1).into_iter().filter(|e| e.label).collect();
    assert!(matches!(fit_weights(&one_class, FitOptions::default()), Err(Error::DegenerateData(_))));
    assert!(matches!(fit_weights(&toy(1)[..1], FitOptions::default()), Err(Error::DegenerateData(_))));
}
