use ahlfors::degrees::{compute_ball_profile, compute_profile, profile_with, reconcile_tau_vs_ball};
use ahlfors::exhaustion::{catalog_exhaustion, ExhaustionName, Filtration, SamplerConfig};
use ahlfors::forms::RANK_ONE_DOMINATION;
use ahlfors::geometry::{catalog_map, MapName};
use ahlfors::Error;
use std::f64::consts::PI;

fn power(d: i64) -> ahlfors::geometry::HolomorphicMapSpec {
    catalog_map(&MapName::PowerCurve { d }).unwrap()
}

fn norm_squared(k: usize) -> ahlfors::exhaustion::ExhaustionSpec {
    catalog_exhaustion(&ExhaustionName::NormSquared { k, r0: None }).unwrap()
}

/// `a_1(r) = d pi r^{2d} / (1 + r^{2d})` and its derivative.
fn a1(d: i64, r: f64) -> (f64, f64) {
    let p = r.powi(2 * d as i32);
    let df = 2.0 * (d * d) as f64 * PI * p / r / (1.0 + p).powi(2);
    (d as f64 * PI * p / (1.0 + p), df)
}

#[test]
fn ball_degree_functions_match_closed_forms() {
    let grid = [0.5, 1.0, 2.0];
    let f = Filtration::ball(1).unwrap();
    for d in 1..=3 {
        let p = profile_with(&power(d), &f, &grid, 40_000, 4, &SamplerConfig::stratified()).unwrap();
        for (i, r) in grid.iter().enumerate() {
            let (v, dv) = a1(d, *r);
            assert!(p.t_k[i].agrees_with(ahlfors::Estimate::exact(v), 3.0, 1e-6 * v), "d={d} r={r}: {:?} vs {v}", p.t_k[i]);
            let dt = p.dt_k[i].unwrap();
            assert!(dt.agrees_with(ahlfors::Estimate::exact(dv), 3.0, 1e-5 * dv), "d={d} r={r}: {dt:?} vs {dv}");
            assert!((p.t_km1[i].value - PI * r * r).abs() <= 1e-9 * r * r);
        }
    }
}

#[test]
fn sublevel_degree_functions_of_the_identity_curve() {
    // tau = |z|^2: t_0(s) = pi s^2 and t_1(s) = pi s / (1 + s)
    let grid = [0.5, 1.0, 3.0];
    let p = compute_profile(&power(1), &norm_squared(1), &grid, 100_000, 8).unwrap();
    for (i, s) in grid.iter().enumerate() {
        let t1 = PI * s / (1.0 + s);
        assert!(p.t_k[i].agrees_with(ahlfors::Estimate::exact(t1), 3.0, 0.0), "{:?} vs {t1}", p.t_k[i]);
        assert!(p.t_km1[i].agrees_with(ahlfors::Estimate::exact(PI * s * s), 3.0, 1e-9), "{:?}", p.t_km1[i]);
        let d0 = p.dt_km1[i].unwrap();
        assert!(d0.agrees_with(ahlfors::Estimate::exact(2.0 * PI * s), 3.0, 1e-5 * s), "{d0:?}");
    }
}

#[test]
fn reconciliation_of_the_two_filtrations() {
    let map = power(2);
    let cfg = SamplerConfig::stratified();
    let radii = [1.0, 2.0];
    let squares: Vec<f64> = radii.iter().map(|r| r * r).collect();
    let tau = profile_with(&map, &Filtration::tau(norm_squared(1)), &squares, 40_000, 1, &cfg).unwrap();
    let ball = profile_with(&map, &Filtration::ball(1).unwrap(), &radii, 40_000, 1, &cfg).unwrap();
    let rec = reconcile_tau_vs_ball(&tau, &ball, RANK_ONE_DOMINATION).unwrap();
    assert_eq!(rec.rows.len(), 2);
    assert!(rec.all_agree && rec.bridge_verified, "{rec:?}");
}

#[test]
fn profiles_are_reproducible_and_serialize() {
    let grid = [0.5, 1.0];
    let a = compute_ball_profile(&power(2), &grid, 2000, 5).unwrap();
    let b = compute_ball_profile(&power(2), &grid, 2000, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    assert!(a
        .to_csv()
        .starts_with("r,t_k,t_k_err,t_km1,t_km1_err,dt_k,dt_k_err,dt_km1,dt_km1_err,critical_flag\n"));
    let json = serde_json::to_string(&a).unwrap();
    assert_eq!(serde_json::from_str::<ahlfors::degrees::DegreeProfile>(&json).unwrap(), a);
}

#[test]
fn invalid_grids_and_dimensions_are_rejected() {
    let err = compute_ball_profile(&power(1), &[1.0, 0.5], 100, 0).unwrap_err();
    assert!(matches!(err, Error::InvalidGrid(_)), "{err:?}");
    let product = catalog_map(&MapName::ProductMap { d1: 1, d2: 1 }).unwrap();
    let err = compute_profile(&product, &norm_squared(1), &[1.0], 100, 0).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch(_)), "{err:?}");
}
