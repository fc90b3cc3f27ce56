//! Numerical laboratory for the value distribution of holomorphic maps
//! `f: V -> X` from `V = C^k` into a compact hermitian manifold `(X, omega)`.
//!
//! The crate computes the degree functions
//! `t_k(r) = int_{V(r)} f^* omega^k` and
//! `t_{k-1}(r) = int_{V(r)} i d tau ^ dbar tau ^ f^* omega^{k-1}`
//! (and their Euclidean-ball variants), estimates lower bounds for the
//! boundary mass `||d f_*[V(r)]||`, checks the inequality
//! `||d f_*[V(r)]||^2 <= K t'_{k-1}(r) t'_k(r)` along radius grids, and runs
//! the two radius-selection procedures that produce normalized currents
//! `f_*[V(r_n)] / volume(f(V(r_n)))`.
//!
//! Module map:
//! - [`forms`]: positive (1,1)-form linear algebra and wedge densities.
//! - [`geometry`]: catalog targets (projective spaces, products, flat tori) and maps.
//! - [`exhaustion`]: exhaustion functions, filtrations and Monte Carlo samplers.
//! - [`degrees`]: degree profiles `t_k`, `t_{k-1}`, `a_k`, `a_{k-1}`.
//! - [`currents`]: pushforward currents, test forms and boundary pairings.
//! - [`verification`]: inequality reports and regularity scans.
//! - [`criteria`]: finite-type fits, doubling radii and the two selectors.
//! - [`cli`]: configuration, batch runner and report writers.

pub mod cli;
pub mod criteria;
pub mod currents;
pub mod degrees;
pub mod error;
pub mod estimate;
pub mod exhaustion;
pub mod forms;
pub mod geometry;
pub mod verification;

pub use error::{Error, Result};
pub use estimate::{ComplexEstimate, Estimate};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
