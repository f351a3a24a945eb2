use chrono::{Days, NaiveDate};
use megazord_core::decomposition::SeasonalPattern;
use megazord_core::ingest::{holdout_split, UnivariateSeries};
use megazord_core::megazord::{
    fit, forecast_test, forecast_test_detailed, MegazordConfig, VariantSpec,
};
use megazord_core::Error;
use megazord_neural::TrainConfig;
use proptest::prelude::*;

fn series(values: Vec<f64>) -> UnivariateSeries {
    let start = NaiveDate::from_ymd_opt(2014, 6, 2).unwrap();
    let dates = (0..values.len())
        .map(|i| start + Days::new(i as u64))
        .collect();
    UnivariateSeries::new("M", dates, values).unwrap()
}

fn quick(epochs: usize) -> MegazordConfig {
    MegazordConfig {
        train: TrainConfig {
            epochs,
            ..TrainConfig::default()
        },
        ..MegazordConfig::default()
    }
}

fn wave(len: usize, phase: f64) -> Vec<f64> {
    (0..len)
        .map(|t| {
            let t = t as f64;
            60.0 + 0.12 * t
                + 1.5 * (t * 2.0 * std::f64::consts::PI / 5.0 + phase).sin()
                + 0.3 * (t * 0.37).cos()
        })
        .collect()
}

#[test]
fn forecasts_decompose_additively() {
    let split = holdout_split(&series(wave(90, 0.3)), 0.8).unwrap();
    for variant in VariantSpec::ALL {
        let model = fit(&split.train, variant, &quick(3), 11).unwrap();
        let (run, steps) = forecast_test_detailed(&model, &split).unwrap();
        assert_eq!(run.horizon(), split.horizon());
        for s in &steps {
            let back = s.prediction - s.seasonal_hat - s.delta_hat;
            assert!(
                (back - s.trend_prev).abs() <= 1e-9 * s.prediction.abs(),
                "{variant:?}"
            );
            if variant.seasonal.is_none() {
                assert_eq!(s.seasonal_hat, 0.0);
            }
        }
    }
}

#[test]
fn trend_only_variants_ignore_the_seasonal_pattern() {
    let split = holdout_split(&series(wave(90, 1.1)), 0.8).unwrap();
    for variant in [
        VariantSpec::parse("L0").unwrap(),
        VariantSpec::parse("C0").unwrap(),
    ] {
        let model = fit(&split.train, variant, &quick(3), 5).unwrap();
        let mut scrambled = model.clone();
        scrambled.seasonal_pattern =
            SeasonalPattern::from_values((0..10).map(|i| (i as f64 - 4.5) * 3.0).collect());
        assert_eq!(
            forecast_test(&model, &split).unwrap(),
            forecast_test(&scrambled, &split).unwrap()
        );
    }
    let variant = VariantSpec::parse("CC").unwrap();
    let model = fit(&split.train, variant, &quick(3), 5).unwrap();
    let mut scrambled = model.clone();
    scrambled.seasonal_pattern =
        SeasonalPattern::from_values((0..10).map(|i| (i as f64 - 4.5) * 3.0).collect());
    assert_ne!(
        forecast_test(&model, &split).unwrap().predictions,
        forecast_test(&scrambled, &split).unwrap().predictions
    );
}

#[test]
fn same_seed_same_forecasts() {
    let split = holdout_split(&series(wave(80, 0.0)), 0.8).unwrap();
    let v = VariantSpec::parse("LC").unwrap();
    let a = forecast_test(&fit(&split.train, v, &quick(2), 9).unwrap(), &split).unwrap();
    let b = forecast_test(&fit(&split.train, v, &quick(2), 9).unwrap(), &split).unwrap();
    let c = forecast_test(&fit(&split.train, v, &quick(2), 10).unwrap(), &split).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.predictions, c.predictions);
}

#[test]
fn model_bound_to_its_training_series() {
    let split = holdout_split(&series(wave(80, 0.0)), 0.8).unwrap();
    let other = holdout_split(&series(wave(80, 0.5)), 0.8).unwrap();
    let model = fit(&split.train, VariantSpec::ALL[0], &quick(1), 1).unwrap();
    assert!(matches!(
        forecast_test(&model, &other),
        Err(Error::ModelSeriesMismatch)
    ));
}

#[test]
fn short_training_series_rejected() {
    let s = series(wave(21, 0.0));
    assert!(matches!(
        fit(&s, VariantSpec::ALL[0], &quick(1), 1),
        Err(Error::SeriesTooShort {
            len: 21,
            required: 22
        })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Perturbing observations at or after step t never changes the forecast for t.
    #[test]
    fn forecasts_are_causal(
        phase in 0.0f64..6.0,
        offset in 0usize..15,
        bump in 0.5f64..40.0,
        variant in prop::sample::select(VariantSpec::ALL.to_vec()),
    ) {
        let values = wave(80, phase);
        let split = holdout_split(&series(values.clone()), 0.8).unwrap();
        let model = fit(&split.train, variant, &quick(1), 3).unwrap();
        let start = split.train.len();
        let cut = start + offset.min(split.horizon() - 1);
        let mut mutated = values;
        for v in &mut mutated[cut..] {
            *v += bump;
        }
        let moved = holdout_split(&series(mutated), 0.8).unwrap();
        let a = forecast_test(&model, &split).unwrap();
        let b = forecast_test(&model, &moved).unwrap();
        prop_assert_eq!(&a.predictions[..=cut - start], &b.predictions[..=cut - start]);
        if cut + 1 < start + split.horizon() {
            prop_assert_ne!(a.predictions[cut + 1 - start], b.predictions[cut + 1 - start]);
        }
    }
}
