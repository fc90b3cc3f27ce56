//! Contour-quadrature oracle for boundary pairings of curves (`k = 1`).
//!
//! For a one-dimensional domain, `<d f_*[B(0, rho)], psi dbar h>` equals the
//! contour integral of `psi(f) d(h o f)/dzbar dzbar` over `|z| = rho`, which the
//! periodic trapezoid rule computes to near machine precision. The
//! antiholomorphic derivative is taken by fourth-order central differences
//! of `h o f`.

use ahlfors::currents::{TestForm, Weight};
use ahlfors::geometry::HolomorphicMapSpec;
use ahlfors::C64;

fn scalar(map: &HolomorphicMapSpec, form: &TestForm, z: C64) -> (f64, C64) {
    let target = map.target();
    let lifts = target.homogeneous_lifts(&map.eval(&[z]));
    let psi = match &form.weight {
        Weight::One => 1.0,
        Weight::Modulus { monomial } | Weight::RealPart { monomial } => monomial.value(&lifts).re,
    };
    let h = form
        .potential
        .as_ref()
        .map(|m| m.value(&lifts))
        .unwrap_or(C64::new(0.0, 0.0));
    (psi, h)
}

fn trapezoid(map: &HolomorphicMapSpec, form: &TestForm, rho: f64, nodes: usize, step: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..nodes {
        let t = std::f64::consts::TAU * j as f64 / nodes as f64;
        let z = C64::from_polar(rho, t);
        let (psi, _) = scalar(map, form, z);
        let h = |w: C64| scalar(map, form, w).1;
        // fourth-order central differences along x and y
        let d = |e: C64| (8.0 * (h(z + e) - h(z - e)) - (h(z + 2.0 * e) - h(z - 2.0 * e))) / (12.0 * step);
        let dbar = (d(C64::new(step, 0.0)) + i * d(C64::new(0.0, step))) * 0.5;
        let dzbar_dt = -i * C64::from_polar(rho, -t);
        acc += dbar * dzbar_dt * psi;
    }
    acc * (std::f64::consts::TAU / nodes as f64) * form.scale
}

/// Contour value and a tolerance from halving the difference step and
/// doubling the node count.
pub fn contour_pairing(map: &HolomorphicMapSpec, form: &TestForm, rho: f64, nodes: usize) -> (C64, f64) {
    let step = 1e-3 * rho;
    let value = trapezoid(map, form, rho, nodes, step);
    let finer_step = trapezoid(map, form, rho, nodes, step / 2.0);
    let more_nodes = trapezoid(map, form, rho, 2 * nodes, step);
    let tol = (value - finer_step).norm() + (value - more_nodes).norm() + 1e-12 * value.norm().max(1.0);
    (value, tol)
}
