//! Compact hermitian targets with explicit atlases.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::forms::{factorial, pullback, CMatrix, HermitianMatrix};
use crate::{Error, Result, C64};

/// Which catalog target a spec realizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetName {
    /// `P^m` with the Fubini-Study form of potential `log(1 + |w|^2)`.
    ProjectiveSpace { m: usize },
    /// `C^m / (Z + iZ)^m` with the flat form.
    FlatTorus { m: usize },
    /// `P^{m_1} x ... x P^{m_s}` with the sum of the factor Fubini-Study forms.
    ProjectiveProduct { factors: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
enum Structure {
    Projective(Vec<usize>),
    Torus(usize),
}

/// A compact hermitian manifold `(X, omega)` given chartwise.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetManifoldSpec {
    name: TargetName,
    structure: Structure,
}

/// A point of the target in one of its charts.
///
/// For projective products `charts[f]` is the index of the homogeneous
/// coordinate set to 1 in factor `f`; `coords` concatenates the affine
/// coordinates of all factors. Tori have no chart indices.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetPoint {
    pub charts: Vec<usize>,
    pub coords: Vec<C64>,
}

pub fn catalog_target(name: &TargetName) -> Result<TargetManifoldSpec> {
    let structure = match name {
        TargetName::ProjectiveSpace { m } => {
            if *m == 0 {
                return Err(Error::Catalog("projective_space requires m >= 1".into()));
            }
            Structure::Projective(vec![*m])
        }
        TargetName::FlatTorus { m } => {
            if *m == 0 {
                return Err(Error::Catalog("flat_torus requires m >= 1".into()));
            }
            Structure::Torus(*m)
        }
        TargetName::ProjectiveProduct { factors } => {
            if factors.is_empty() || factors.contains(&0) {
                return Err(Error::Catalog(
                    "projective_product requires nonempty factors of dimension >= 1".into(),
                ));
            }
            Structure::Projective(factors.clone())
        }
    };
    Ok(TargetManifoldSpec {
        name: name.clone(),
        structure,
    })
}

/// Fubini-Study coefficient matrix at affine coordinates `w`:
/// `G_ab = (delta_ab (1 + |w|^2) - conj(w_a) w_b) / (1 + |w|^2)^2`.
pub fn fubini_study(w: &[C64]) -> CMatrix {
    let n = w.len();
    let s = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
    CMatrix::from_fn(n, n, |a, b| {
        let delta = if a == b { s } else { 0.0 };
        (C64::new(delta, 0.0) - w[a].conj() * w[b]) / (s * s)
    })
}

/// Homogeneous lift with `1` at `chart`.
pub fn insert_one(affine: &[C64], chart: usize) -> Vec<C64> {
    let mut lift = Vec::with_capacity(affine.len() + 1);
    lift.extend_from_slice(&affine[..chart]);
    lift.push(C64::new(1.0, 0.0));
    lift.extend_from_slice(&affine[chart..]);
    lift
}

/// Index of the homogeneous coordinate of largest modulus.
pub fn dominant_index(homogeneous: &[C64]) -> usize {
    let mut best = 0;
    for (i, z) in homogeneous.iter().enumerate() {
        if z.norm_sqr() > homogeneous[best].norm_sqr() {
            best = i;
        }
    }
    best
}

/// Affine coordinates in `chart`, or `None` when that coordinate vanishes.
pub fn dehomogenize(homogeneous: &[C64], chart: usize) -> Option<Vec<C64>> {
    let pivot = homogeneous[chart];
    if pivot.norm_sqr() == 0.0 {
        return None;
    }
    Some(
        homogeneous
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != chart)
            .map(|(_, z)| z / pivot)
            .collect(),
    )
}

impl TargetManifoldSpec {
    pub fn name(&self) -> &TargetName {
        &self.name
    }

    pub fn label(&self) -> String {
        match &self.name {
            TargetName::ProjectiveSpace { m } => format!("projective_space({m})"),
            TargetName::FlatTorus { m } => format!("flat_torus({m})"),
            TargetName::ProjectiveProduct { factors } => {
                let parts: Vec<String> = factors.iter().map(|m| m.to_string()).collect();
                format!("projective_product({})", parts.join(","))
            }
        }
    }

    pub fn complex_dimension(&self) -> usize {
        match &self.structure {
            Structure::Projective(f) => f.iter().sum(),
            Structure::Torus(m) => *m,
        }
    }

    /// Dimensions of the projective factors (empty for tori).
    pub fn projective_factors(&self) -> &[usize] {
        match &self.structure {
            Structure::Projective(f) => f,
            Structure::Torus(_) => &[],
        }
    }

    pub fn is_projective(&self) -> bool {
        matches!(self.structure, Structure::Projective(_))
    }

    pub fn chart_count(&self) -> usize {
        match &self.structure {
            Structure::Projective(f) => f.iter().map(|m| m + 1).product(),
            Structure::Torus(_) => 1,
        }
    }

    /// Global chart index from per-factor chart indices (mixed radix).
    pub fn chart_index(&self, charts: &[usize]) -> usize {
        let mut index = 0;
        let mut radix = 1;
        for (c, m) in charts.iter().zip(self.projective_factors()) {
            index += c * radix;
            radix *= m + 1;
        }
        index
    }

    /// Per-factor chart indices from a global chart index.
    pub fn chart_indices(&self, mut index: usize) -> Vec<usize> {
        self.projective_factors()
            .iter()
            .map(|m| {
                let c = index % (m + 1);
                index /= m + 1;
                c
            })
            .collect()
    }

    /// Metric coefficient matrix at a chart point.
    pub fn metric_at(&self, chart: usize, coords: &[C64]) -> Result<HermitianMatrix> {
        if coords.len() != self.complex_dimension() {
            return Err(Error::DimensionMismatch(format!(
                "chart point has {} coordinates, target dimension is {}",
                coords.len(),
                self.complex_dimension()
            )));
        }
        if chart >= self.chart_count() {
            return Err(Error::Catalog(format!("chart {chart} out of range")));
        }
        match &self.structure {
            Structure::Torus(m) => Ok(HermitianMatrix::identity(*m)),
            Structure::Projective(factors) => {
                let n = self.complex_dimension();
                let mut g = CMatrix::zeros(n, n);
                let mut offset = 0;
                for m in factors {
                    let block = fubini_study(&coords[offset..offset + m]);
                    g.view_mut((offset, offset), (*m, *m)).copy_from(&block);
                    offset += m;
                }
                Ok(HermitianMatrix::symmetrized(g))
            }
        }
    }

    pub fn metric_at_point(&self, p: &TargetPoint) -> HermitianMatrix {
        self.metric_at(self.chart_index(&p.charts), &p.coords)
            .expect("target point is consistent with its target")
    }

    /// `int_X omega^m`.
    pub fn total_volume(&self) -> Option<f64> {
        match &self.structure {
            Structure::Torus(m) => Some(factorial(*m)),
            Structure::Projective(factors) => {
                let total: usize = factors.iter().sum();
                let multinomial =
                    factorial(total) / factors.iter().map(|m| factorial(*m)).product::<f64>();
                Some(multinomial * std::f64::consts::PI.powi(total as i32))
            }
        }
    }

    /// Point from per-factor homogeneous coordinates, using the dominant-coordinate chart.
    pub fn point_from_homogeneous(&self, lifts: &[Vec<C64>]) -> TargetPoint {
        let mut charts = Vec::with_capacity(lifts.len());
        let mut coords = Vec::with_capacity(self.complex_dimension());
        for lift in lifts {
            let chart = dominant_index(lift);
            charts.push(chart);
            coords.extend(dehomogenize(lift, chart).expect("dominant coordinate is nonzero"));
        }
        TargetPoint { charts, coords }
    }

    /// Torus point reduced to the fundamental domain.
    pub fn torus_point(&self, w: &[C64]) -> TargetPoint {
        TargetPoint {
            charts: Vec::new(),
            coords: w
                .iter()
                .map(|z| C64::new(z.re.rem_euclid(1.0), z.im.rem_euclid(1.0)))
                .collect(),
        }
    }

    /// Per-factor homogeneous lifts with `1` in the chart coordinate.
    pub fn homogeneous_lifts(&self, p: &TargetPoint) -> Vec<Vec<C64>> {
        let mut offset = 0;
        p.charts
            .iter()
            .zip(self.projective_factors())
            .map(|(chart, m)| {
                let lift = insert_one(&p.coords[offset..offset + m], *chart);
                offset += m;
                lift
            })
            .collect()
    }

    /// Coordinates of `p` in another chart together with the transition
    /// Jacobian `d w_new / d w_old`; `None` off the overlap.
    pub fn change_chart(&self, p: &TargetPoint, new_charts: &[usize]) -> Option<(TargetPoint, CMatrix)> {
        let factors = self.projective_factors();
        if factors.is_empty() || new_charts.len() != factors.len() {
            return None;
        }
        let n = self.complex_dimension();
        let lifts = self.homogeneous_lifts(p);
        let mut coords = Vec::with_capacity(n);
        let mut jac = CMatrix::zeros(n, n);
        let mut offset = 0;
        for (f, m) in factors.iter().enumerate() {
            let lift = &lifts[f];
            let (old, new) = (p.charts[f], new_charts[f]);
            let pivot = lift[new];
            if pivot.norm_sqr() == 0.0 {
                return None;
            }
            coords.extend(dehomogenize(lift, new)?);
            // rows: new affine indices, columns: old affine indices
            let new_idx: Vec<usize> = (0..=*m).filter(|i| *i != new).collect();
            let old_idx: Vec<usize> = (0..=*m).filter(|i| *i != old).collect();
            for (row, i) in new_idx.iter().enumerate() {
                for (col, b) in old_idx.iter().enumerate() {
                    let mut d = C64::new(0.0, 0.0);
                    if i == b {
                        d += 1.0 / pivot;
                    }
                    if *b == new {
                        d -= lift[*i] / (pivot * pivot);
                    }
                    jac[(offset + row, offset + col)] = d;
                }
            }
            offset += m;
        }
        Some((
            TargetPoint {
                charts: new_charts.to_vec(),
                coords,
            },
            jac,
        ))
    }

    /// Metric in chart `old` recomputed by pulling back the metric of chart
    /// `new` through the transition map. Agrees with `metric_at` on overlaps.
    pub fn transported_metric(&self, p: &TargetPoint, new_charts: &[usize]) -> Option<HermitianMatrix> {
        let (q, jac) = self.change_chart(p, new_charts)?;
        pullback(&jac, &self.metric_at_point(&q)).ok()
    }

    /// Random point, distributed by the invariant measure for projective
    /// factors and uniformly on the fundamental domain for tori.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> TargetPoint {
        match &self.structure {
            Structure::Torus(m) => {
                let w: Vec<C64> = (0..*m)
                    .map(|_| C64::new(rng.random::<f64>(), rng.random::<f64>()))
                    .collect();
                self.torus_point(&w)
            }
            Structure::Projective(factors) => {
                let lifts: Vec<Vec<C64>> = factors
                    .iter()
                    .map(|m| {
                        (0..=*m)
                            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                            .collect()
                    })
                    .collect();
                self.point_from_homogeneous(&lifts)
            }
        }
    }
}
