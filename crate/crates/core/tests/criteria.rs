use ahlfors::criteria::{
    doubling_radii, fit_finite_type, limit_diagnostics, select_radii_thm2, select_radii_thm3, thm2_hypothesis,
    thm3_hypothesis, HypothesisVerdict,
};
use ahlfors::currents::{boundary_dictionary, build_current_with, bulk_dictionary, Normalization};
use ahlfors::degrees::{geometric_grid, profile_with, DegreeProfile};
use ahlfors::exhaustion::{catalog_exhaustion, ExhaustionName, Filtration, FiltrationKind, SamplerConfig};
use ahlfors::geometry::{catalog_map, MapName};
use ahlfors::Error;
use std::f64::consts::PI;

/// Sublevel profile of `z^d` for `tau = |z|^2`: `t_0 = pi s^2`, `t_1 = d pi s^d / (1 + s^d)`.
fn closed_form_power(d: i32, ratio: f64) -> DegreeProfile {
    let grid = geometric_grid(0.5, 50.0, ratio).unwrap();
    let t1 = grid.iter().map(|s| d as f64 * PI * s.powi(d) / (1.0 + s.powi(d))).collect();
    let t0 = grid.iter().map(|s| PI * s * s).collect();
    DegreeProfile::from_values(FiltrationKind::TauSublevel, 1, grid, t1, t0).unwrap()
}

#[test]
fn saturating_volume_is_finite_type_with_doubling_radii() {
    let map = catalog_map(&MapName::PowerCurve { d: 2 }).unwrap();
    let exh = catalog_exhaustion(&ExhaustionName::NormSquared { k: 1, r0: None }).unwrap();
    let grid = geometric_grid(0.5, 50.0, 1.2).unwrap();
    let profile = profile_with(&map, &Filtration::tau(exh), &grid, 20_000, 1, &SamplerConfig::stratified()).unwrap();
    let fit = fit_finite_type(&profile).unwrap();
    assert!(fit.is_finite_type && fit.c2 < 0.1, "{fit:?}");
    let d = doubling_radii(&profile, None, 4).unwrap();
    assert_eq!(d.radii.len(), 4);
    assert!(d.ratios.iter().all(|q| *q <= d.k_doubling));
    // t_k(2R) / t_k(R) tends to 1 for a saturating image
    assert!(d.ratios.last().unwrap() - 1.0 < 0.01, "{d:?}");
}

#[test]
fn sublevel_hypothesis_quantity_of_the_identity_curve_tends_to_one() {
    // t_0 / (s^2 t_1) = (1 + s) / s: bounded but not vanishing
    let p = closed_form_power(1, 1.1);
    let h = thm2_hypothesis(&p);
    for (s, q) in &h.values {
        assert!((q.value - (1.0 + s) / s).abs() < 1e-12);
    }
    assert_eq!(h.verdict, HypothesisVerdict::Unsatisfied);
}

#[test]
fn power_curves_satisfy_the_derivative_hypothesis_on_refined_grids() {
    for d in 1..=3 {
        for ratio in [1.2, 1.1, 1.05] {
            let h = thm3_hypothesis(&closed_form_power(d, ratio), 0.5, 10.0);
            assert_eq!(h.verdict, HypothesisVerdict::Satisfied, "d={d} ratio={ratio}");
            // decreasing toward 2 pi / sqrt(d pi); the proxy is read at the start of the last decade
            let limit = 2.0 * PI / (d as f64 * PI).sqrt();
            let proxy = h.limsup_proxy.unwrap().value;
            assert!(proxy > 0.95 * limit && proxy < 1.2 * limit, "d={d}: {proxy} vs {limit}");
        }
    }
}

#[test]
fn degenerate_maps_are_refused_by_both_selectors() {
    let map = catalog_map(&MapName::DegenerateMap { c_re: 1.0, c_im: 0.0 }).unwrap();
    let f = Filtration::ball(1).unwrap();
    let cfg = SamplerConfig::default();
    let grid = geometric_grid(0.5, 5.0, 1.5).unwrap();
    let profile = profile_with(&map, &f, &grid, 1000, 1, &cfg).unwrap();
    let dict = boundary_dictionary(map.target(), 1, 2, 4, 0).unwrap();
    let e2 = select_radii_thm2(&map, &f, &profile, &dict, &[1.0], 1000, 1, &cfg, None).unwrap_err();
    let e3 = select_radii_thm3(&map, &f, &profile, &dict, 0.5, 10.0, 1000, 1, &cfg).unwrap_err();
    assert!(matches!(e2, Error::DegenerateMap(_)) && matches!(e3, Error::DegenerateMap(_)));
}

#[test]
fn repeated_currents_have_zero_distances() {
    let map = catalog_map(&MapName::PowerCurve { d: 2 }).unwrap();
    let f = Filtration::ball(1).unwrap();
    let cfg = SamplerConfig::stratified();
    let c = build_current_with(&map, &f, 3.0, 4000, 2, Normalization::UnitMass, &cfg).unwrap();
    let dict = boundary_dictionary(map.target(), 1, 2, 6, 0).unwrap();
    let bulk = bulk_dictionary(map.target(), 1, 2, 6, 0).unwrap();
    let diag = limit_diagnostics(&[c.clone(), c.clone(), c], &dict, &bulk).unwrap();
    assert_eq!(diag.pairwise.len(), 2);
    assert!(diag.pairwise.iter().all(|p| p.distance.value == 0.0));
    assert!(diag.mass_residuals.iter().all(|m| m.ok));
    assert!(diag.positivity_ok);
}

#[test]
fn thm2_radii_lie_in_their_doubling_windows() {
    let map = catalog_map(&MapName::PowerCurve { d: 2 }).unwrap();
    let f = Filtration::ball(1).unwrap();
    let cfg = SamplerConfig::stratified();
    let grid = geometric_grid(0.5, 20.0, 1.2).unwrap();
    let profile = profile_with(&map, &f, &grid, 8000, 3, &cfg).unwrap();
    let dict = boundary_dictionary(map.target(), 1, 2, 6, 0).unwrap();
    let d = doubling_radii(&profile, None, 3).unwrap();
    let sel = select_radii_thm2(&map, &f, &profile, &dict, &d.radii, 8000, 3, &cfg, None).unwrap();
    assert_eq!(sel.report.selected.len(), 3);
    for s in &sel.report.selected {
        let big_r = s.big_r.unwrap();
        assert!(s.r >= big_r * (1.0 - 1e-12) && s.r <= 2.0 * big_r * (1.0 + 1e-12));
    }
    assert!(sel.report.selected.windows(2).all(|w| w[1].r > w[0].r));
    assert!(sel.report.radii_csv().lines().count() == 4);
}
