#![allow(dead_code)]

pub mod contour;
pub mod wedge_oracle;

use ahlfors::forms::CMatrix;
use ahlfors::C64;
use rand::Rng;

/// Random positive definite `M M^* + shift I`.
pub fn random_positive<R: Rng>(rng: &mut R, k: usize, shift: f64) -> CMatrix {
    let m = CMatrix::from_fn(k, k, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    &m * m.adjoint() + CMatrix::identity(k, k) * C64::new(shift, 0.0)
}

/// Random hermitian matrix with entries in the unit box.
pub fn random_hermitian<R: Rng>(rng: &mut R, k: usize) -> CMatrix {
    let m = CMatrix::from_fn(k, k, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}
