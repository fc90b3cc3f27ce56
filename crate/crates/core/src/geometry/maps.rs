//! Catalog of holomorphic maps `f: C^k -> X` with analytic Jacobians.

use serde::{Deserialize, Serialize};

use super::target::{catalog_target, dominant_index, TargetManifoldSpec, TargetName, TargetPoint};
use crate::forms::{pullback, top_wedge_density, CMatrix, HermitianMatrix};
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapName {
    /// `z -> [1 : z^d]` into `P^1`.
    PowerCurve { d: i64 },
    /// `z -> [1 : e^z]` into `P^1`.
    ExpCurve,
    /// `(z1, z2) -> ([1 : z1^d1], [1 : z2^d2])` into `P^1 x P^1`.
    ProductMap { d1: i64, d2: i64 },
    /// `C^k -> C^m = {Z_0 = 1} in P^m`, `z -> [1 : z : 0]`.
    LinearEmbedding { k: usize, m: usize },
    /// Constant map `z -> [1 : c]` (negative control).
    DegenerateMap {
        #[serde(default)]
        c_re: f64,
        #[serde(default)]
        c_im: f64,
    },
}

/// Value of a map together with its Jacobian in the chart of the value.
#[derive(Clone, Debug, PartialEq)]
pub struct MapJet {
    pub point: TargetPoint,
    /// `m x k`, rows indexed by the chart coordinates of `point`.
    pub jacobian: CMatrix,
}

/// Homogeneous coordinates of one projective factor and their `z`-derivatives.
#[derive(Clone, Debug)]
pub struct FactorLift {
    pub coords: Vec<C64>,
    /// `(m_f + 1) x k`.
    pub derivative: CMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolomorphicMapSpec {
    name: MapName,
    target: TargetManifoldSpec,
    domain_dimension: usize,
    nondegenerate_hint: bool,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Lift of `w -> [1 : w^d]`, switching to `[w^-d : 1]` outside the unit disc.
fn power_lift(w: C64, d: i32, column: usize, k: usize) -> FactorLift {
    let mut derivative = CMatrix::zeros(2, k);
    if w.norm() <= 1.0 {
        derivative[(1, column)] = w.powi(d - 1) * d as f64;
        FactorLift {
            coords: vec![one(), w.powi(d)],
            derivative,
        }
    } else {
        let inv = w.inv();
        derivative[(0, column)] = -inv.powi(d + 1) * d as f64;
        FactorLift {
            coords: vec![inv.powi(d), one()],
            derivative,
        }
    }
}

pub fn catalog_map(name: &MapName) -> Result<HolomorphicMapSpec> {
    let positive = |label: &str, d: i64| {
        if d <= 0 || d > 64 {
            Err(Error::Catalog(format!("{label} must lie in 1..=64, got {d}")))
        } else {
            Ok(())
        }
    };
    let (target, k, hint) = match name {
        MapName::PowerCurve { d } => {
            positive("power_curve degree", *d)?;
            (TargetName::ProjectiveSpace { m: 1 }, 1, true)
        }
        MapName::ExpCurve => (TargetName::ProjectiveSpace { m: 1 }, 1, true),
        MapName::ProductMap { d1, d2 } => {
            positive("product_map d1", *d1)?;
            positive("product_map d2", *d2)?;
            (TargetName::ProjectiveProduct { factors: vec![1, 1] }, 2, true)
        }
        MapName::LinearEmbedding { k, m } => {
            if *k == 0 || k > m {
                return Err(Error::Catalog(format!(
                    "linear_embedding requires 1 <= k <= m, got k={k}, m={m}"
                )));
            }
            (TargetName::ProjectiveSpace { m: *m }, *k, true)
        }
        MapName::DegenerateMap { c_re, c_im } => {
            if !c_re.is_finite() || !c_im.is_finite() {
                return Err(Error::Catalog("degenerate_map constant must be finite".into()));
            }
            (TargetName::ProjectiveSpace { m: 1 }, 1, false)
        }
    };
    Ok(HolomorphicMapSpec {
        name: name.clone(),
        target: catalog_target(&target)?,
        domain_dimension: k,
        nondegenerate_hint: hint,
    })
}

impl HolomorphicMapSpec {
    pub fn name(&self) -> &MapName {
        &self.name
    }

    pub fn label(&self) -> String {
        match &self.name {
            MapName::PowerCurve { d } => format!("power_curve({d})"),
            MapName::ExpCurve => "exp_curve".into(),
            MapName::ProductMap { d1, d2 } => format!("product_map({d1},{d2})"),
            MapName::LinearEmbedding { k, m } => format!("linear_embedding({k},{m})"),
            MapName::DegenerateMap { c_re, c_im } => format!("degenerate_map({c_re},{c_im})"),
        }
    }

    pub fn target(&self) -> &TargetManifoldSpec {
        &self.target
    }

    pub fn domain_dimension(&self) -> usize {
        self.domain_dimension
    }

    pub fn nondegenerate_hint(&self) -> bool {
        self.nondegenerate_hint
    }

    /// Per-factor homogeneous lifts at `z`; any holomorphic lift is valid
    /// locally, so the lift may be renormalized from point to point.
    pub fn lifts(&self, z: &[C64]) -> Vec<FactorLift> {
        let k = self.domain_dimension;
        match &self.name {
            MapName::PowerCurve { d } => vec![power_lift(z[0], *d as i32, 0, k)],
            MapName::ExpCurve => {
                let mut derivative = CMatrix::zeros(2, 1);
                if z[0].re <= 0.0 {
                    let e = z[0].exp();
                    derivative[(1, 0)] = e;
                    vec![FactorLift {
                        coords: vec![one(), e],
                        derivative,
                    }]
                } else {
                    let e = (-z[0]).exp();
                    derivative[(0, 0)] = -e;
                    vec![FactorLift {
                        coords: vec![e, one()],
                        derivative,
                    }]
                }
            }
            MapName::ProductMap { d1, d2 } => vec![
                power_lift(z[0], *d1 as i32, 0, k),
                power_lift(z[1], *d2 as i32, 1, k),
            ],
            MapName::LinearEmbedding { m, .. } => {
                let mut coords = vec![C64::new(0.0, 0.0); m + 1];
                coords[0] = one();
                coords[1..=k].copy_from_slice(z);
                let mut derivative = CMatrix::zeros(m + 1, k);
                for c in 0..k {
                    derivative[(c + 1, c)] = one();
                }
                vec![FactorLift { coords, derivative }]
            }
            MapName::DegenerateMap { c_re, c_im } => vec![FactorLift {
                coords: vec![one(), C64::new(*c_re, *c_im)],
                derivative: CMatrix::zeros(2, k),
            }],
        }
    }

    pub fn eval(&self, z: &[C64]) -> TargetPoint {
        let lifts: Vec<Vec<C64>> = self.lifts(z).into_iter().map(|l| l.coords).collect();
        self.target.point_from_homogeneous(&lifts)
    }

    /// Value and chart Jacobian: for `w_i = Z_i / Z_j`,
    /// `dw_i = (Z_j dZ_i - Z_i dZ_j) / Z_j^2`.
    pub fn jet(&self, z: &[C64]) -> MapJet {
        let k = self.domain_dimension;
        let lifts = self.lifts(z);
        let m = self.target.complex_dimension();
        let mut jacobian = CMatrix::zeros(m, k);
        let mut charts = Vec::with_capacity(lifts.len());
        let mut coords = Vec::with_capacity(m);
        let mut row = 0;
        for lift in &lifts {
            let j = dominant_index(&lift.coords);
            let pivot = lift.coords[j];
            charts.push(j);
            for i in (0..lift.coords.len()).filter(|i| *i != j) {
                coords.push(lift.coords[i] / pivot);
                for c in 0..k {
                    jacobian[(row, c)] = (pivot * lift.derivative[(i, c)]
                        - lift.coords[i] * lift.derivative[(j, c)])
                        / (pivot * pivot);
                }
                row += 1;
            }
        }
        MapJet {
            point: TargetPoint { charts, coords },
            jacobian,
        }
    }

    /// Affine coordinates of `f(z)` in a prescribed chart.
    pub fn eval_in_chart(&self, z: &[C64], charts: &[usize]) -> Option<Vec<C64>> {
        let mut out = Vec::new();
        for (lift, chart) in self.lifts(z).iter().zip(charts) {
            out.extend(super::target::dehomogenize(&lift.coords, *chart)?);
        }
        Some(out)
    }

    /// Coefficient matrix of `f^* omega` at a jet.
    pub fn pullback_metric(&self, jet: &MapJet) -> HermitianMatrix {
        let g = self.target.metric_at_point(&jet.point);
        pullback(&jet.jacobian, &g).expect("jacobian rows match the target dimension")
    }

    /// Density of `f^* omega^k` at `z` against Euclidean volume.
    pub fn volume_density(&self, z: &[C64]) -> f64 {
        let jet = self.jet(z);
        top_wedge_density(&self.pullback_metric(&jet))
            .map(|d| d.0)
            .unwrap_or(0.0)
    }
}
