use ahlfors::exhaustion::{
    catalog_exhaustion, sample_level, sample_sublevel, ExhaustionName, Filtration, FiltrationKind, SamplerConfig,
};
use ahlfors::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

fn ellipsoid() -> ahlfors::exhaustion::ExhaustionSpec {
    catalog_exhaustion(&ExhaustionName::Ellipsoidal {
        k: 2,
        weights: vec![1.0, 4.0],
        r0: None,
    })
    .unwrap()
}

#[test]
fn volume_error_bars_are_calibrated() {
    // {|z1|^2 + 4|z2|^2 < r} has volume pi^2 r^2 / (2 * 4)
    let spec = ellipsoid();
    let r = 1.5;
    let truth = PI * PI * r * r / 8.0;
    let mut within_one = 0;
    let mut within_three = 0;
    for seed in 0..100 {
        let v = sample_sublevel(&spec, r, 4000, seed).unwrap().total_weight();
        let pull = (v.value - truth).abs() / v.err;
        within_one += usize::from(pull <= 1.0);
        within_three += usize::from(pull <= 3.0);
    }
    assert!(within_three >= 95, "3-sigma coverage {within_three}/100");
    assert!((55..=82).contains(&within_one), "1-sigma coverage {within_one}/100");
}

#[test]
fn stratified_error_bars_are_calibrated() {
    // integral of |z|^2 over the unit disc in C^2 is pi^2 / 3
    let f = Filtration::ball(2).unwrap();
    let cfg = SamplerConfig::stratified();
    let mut within_three = 0;
    for seed in 0..100 {
        let b = f.sample_bulk(1.0, 3200, seed, &cfg).unwrap();
        let values: Vec<f64> = b.points().map(|z| z.iter().map(|c| c.norm_sqr()).sum()).collect();
        let v = b.estimate(&values);
        within_three += usize::from((v.value - PI * PI / 3.0).abs() <= 3.0 * v.err);
    }
    assert!(within_three >= 95, "3-sigma coverage {within_three}/100");
}

#[test]
fn level_batches_measure_the_coarea_density() {
    // int_{tau = r} dS / |grad tau| = d/dr vol{tau < r} = pi^2 r / 4 for the ellipsoid above
    let b = sample_level(&ellipsoid(), 1.5, 200_000, 3).unwrap();
    let v = b.total_weight();
    let truth = PI * PI * 1.5 / 4.0;
    assert!((v.value - truth).abs() <= 3.0 * v.err + 1e-5 * truth, "{v:?} vs {truth}");
}

#[test]
fn ball_and_tau_filtrations_agree_on_norm_squared() {
    let spec = catalog_exhaustion(&ExhaustionName::NormSquared { k: 1, r0: None }).unwrap();
    let tau = Filtration::new(spec, FiltrationKind::TauSublevel).unwrap();
    let ball = Filtration::ball(1).unwrap();
    let cfg = SamplerConfig::default();
    let a = tau.sample_bulk(4.0, 1000, 9, &cfg).unwrap().total_weight();
    let b = ball.sample_bulk(2.0, 1000, 9, &cfg).unwrap().total_weight();
    assert!((a.value - 4.0 * PI).abs() < 1e-12 && (b.value - 4.0 * PI).abs() < 1e-12);
}

#[test]
fn critical_levels_are_refused() {
    let spec = catalog_exhaustion(&ExhaustionName::RadialPerturbation {
        k: 1,
        amplitude: 4.0,
        width: 0.5,
        center: 2.0,
        r0: None,
    })
    .unwrap();
    let c = spec.critical_values()[0];
    assert!(matches!(sample_level(&spec, c, 100, 0), Err(Error::CriticalValue { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn batches_are_deterministic_in_the_seed(seed in any::<u64>(), r in 0.1f64..10.0, stratified in any::<bool>()) {
        let f = Filtration::ball(1).unwrap();
        let cfg = if stratified { SamplerConfig::stratified() } else { SamplerConfig::default() };
        let a = f.sample_bulk(r, 256, seed, &cfg).unwrap();
        let b = f.sample_bulk(r, 256, seed, &cfg).unwrap();
        prop_assert_eq!(&a, &b);
        let c = f.sample_level(r, 256, seed, &cfg).unwrap();
        let d = f.sample_level(r, 256, seed.wrapping_add(1), &cfg).unwrap();
        prop_assert!(c.points().zip(d.points()).any(|(p, q)| p != q));
    }

    #[test]
    fn sublevel_points_lie_in_the_sublevel_set(seed in any::<u64>(), r in 0.05f64..20.0) {
        let spec = ellipsoid();
        let b = sample_sublevel(&spec, r, 200, seed).unwrap();
        for z in b.points() {
            prop_assert!(spec.value(z) < r);
        }
    }
}
