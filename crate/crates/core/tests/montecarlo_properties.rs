use proptest::prelude::*;
use xlindley::montecarlo::{
    empirical_quantile, run_simulation_study, sample_censored, simulate_pivotal_draws, simulate_pivotal_quantiles,
    PivotalConfig, StreamFactory, StudyConfig, DEFAULT_TAUS,
};
use xlindley::{PivotalKind, QuantileTable, XlParams};

/// Independent type-7 quantile: rank position h = (N−1)τ on a sorted copy.
fn reference_quantile(xs: &[f64], tau: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() as f64 - 1.0) * tau;
    let j = h as usize;
    if j + 1 >= v.len() {
        return v[v.len() - 1];
    }
    v[j] * (1.0 - (h - j as f64)) + v[j + 1] * (h - j as f64)
}

#[test]
fn quantile_matches_reference_on_random_vectors() {
    let factory = StreamFactory::new(3, "quantile-reference");
    for i in 0..100 {
        let mut rng = factory.stream(i);
        let len = 1 + (i as usize * 7) % 50;
        let xs: Vec<f64> = (0..len).map(|_| rand::Rng::random_range(&mut rng, -10.0..10.0)).collect();
        for tau in [0.01, 0.025, 0.3, 0.5, 0.77, 0.975] {
            let a = empirical_quantile(&xs, tau).unwrap();
            let b = reference_quantile(&xs, tau);
            assert!((a - b).abs() <= 1e-12 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }
}

#[test]
fn published_quantile_examples() {
    let t1 = simulate_pivotal_quantiles(PivotalKind::LocationBlue, 1.0, 6, 0, None, 10_000, 1, &[0.975]).unwrap();
    assert!((t1[0].value - 3.9428).abs() < 0.35, "{}", t1[0].value);
    let t4 = simulate_pivotal_quantiles(PivotalKind::ScaleBlie, 2.0, 10, 0, None, 10_000, 1, &[0.025]).unwrap();
    assert!((t4[0].value + 1.9644).abs() < 0.05, "{}", t4[0].value);
    let t1s = simulate_pivotal_quantiles(PivotalKind::PredictionBlue, 2.0, 6, 2, Some(6), 10_000, 1, &[0.95]).unwrap();
    assert!((t1s[0].value - 3.7318).abs() < 0.30, "{}", t1s[0].value);
}

#[test]
fn censored_samples_are_reproducible() {
    let p = XlParams::new(2.0, 1.0, 3.0).unwrap();
    let a = sample_censored(10, 4, &p, &mut StreamFactory::new(9, "repro").stream(5)).unwrap();
    let b = sample_censored(10, 4, &p, &mut StreamFactory::new(9, "repro").stream(5)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.values().len(), 6);
}

#[test]
fn persisted_tables_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.csv");
    let table = simulate_pivotal_draws(&PivotalConfig::new(3.0, 6, 2, 1000, 8)).unwrap().table(&DEFAULT_TAUS).unwrap();
    let sidecar = table.save(&path).unwrap();
    assert!(sidecar.exists());
    let back = QuantileTable::load(&path).unwrap();
    assert_eq!(back, table);
    let first = std::fs::read(&path).unwrap();
    let again = simulate_pivotal_draws(&PivotalConfig::new(3.0, 6, 2, 1000, 8)).unwrap().table(&DEFAULT_TAUS).unwrap();
    again.save(&path).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), first);
}

#[test]
fn study_estimator_averages() {
    let table = simulate_pivotal_draws(&PivotalConfig::new(1.0, 6, 1, 10_000, 2)).unwrap().table(&DEFAULT_TAUS).unwrap();
    let r = run_simulation_study(&StudyConfig::new(1.0, 6, 1, 20_000, 12), &table).unwrap();
    let c = xlindley::estimation::blue_coefficients(6, 1, 1.0).unwrap();
    // BLUEs are unbiased; the BLIEs shrink the scale by 1/(1+V2) and shift location by −V3/(1+V2).
    let se_scale = (c.v2 / 20_000.0).sqrt();
    assert!((r.mean_blue_scale - 1.0).abs() < 4.0 * se_scale, "{}", r.mean_blue_scale);
    assert!((r.mean_blie_scale - 1.0 / (1.0 + c.v2)).abs() < 4.0 * se_scale);
    assert!(r.mean_blie_scale < r.mean_blue_scale);
    assert!((r.mean_blie_location - r.mean_blue_location + c.v3 / (1.0 + c.v2)).abs() < 0.01);
    let p = r.prediction(6).unwrap();
    assert!(p.emspe_blip < p.emspe_blup);
    assert!(p.bias_blip < p.bias_blup);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn quantile_rows_monotone(psi in 0.5f64..5.0, n in 4usize..=10, seed in any::<u64>()) {
        let m = n / 3;
        let t = simulate_pivotal_draws(&PivotalConfig::new(psi, n, m, 1000, seed)).unwrap().table(&[0.01, 0.1, 0.5, 0.9, 0.99]).unwrap();
        prop_assert!(t.validate().is_ok());
    }
}
