//! Degree functions `t_k`, `t_{k-1}` of a map along a filtration, and their
//! Euclidean-ball variants `a_k`, `a_{k-1}`.
//!
//! Values are Monte Carlo integrals over `{sigma < r}`. Derivatives are
//! centered difference quotients `(t(r + delta) - t(r - delta)) / (2 delta)`
//! evaluated directly as thin-shell integrals, which avoids differencing two
//! independent noisy bulk sums. Points within the exclusion window of a
//! critical value carry no derivative.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::estimate::Estimate;
use crate::exhaustion::{ExhaustionSpec, Filtration, FiltrationKind, SampleBatch, SamplerConfig};
use crate::forms::{mixed_wedge_density, top_wedge_density, HermitianMatrix, RANK_ONE_DOMINATION};
use crate::geometry::HolomorphicMapSpec;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeProfile {
    pub filtration: FiltrationKind,
    pub k: usize,
    pub grid: Vec<f64>,
    pub t_k: Vec<Estimate>,
    pub t_km1: Vec<Estimate>,
    pub dt_k: Vec<Option<Estimate>>,
    pub dt_km1: Vec<Option<Estimate>>,
    pub critical_flags: Vec<bool>,
    pub n_samples: usize,
    pub seed: u64,
    /// Set when the map claims to be nondegenerate but `t_k` vanishes within noise.
    pub degeneracy_warning: bool,
}

impl DegreeProfile {
    /// Profile from exact values, e.g. closed forms or synthetic test inputs.
    /// Derivatives are grid differences (one-sided at the ends).
    pub fn from_values(
        filtration: FiltrationKind,
        k: usize,
        grid: Vec<f64>,
        t_k: Vec<f64>,
        t_km1: Vec<f64>,
    ) -> Result<Self> {
        check_grid(&grid)?;
        let n = grid.len();
        if t_k.len() != n || t_km1.len() != n {
            return Err(Error::Alignment("one value per grid point required".into()));
        }
        let diff = |v: &[f64]| -> Vec<Option<Estimate>> {
            (0..n)
                .map(|i| {
                    if n < 2 {
                        return None;
                    }
                    let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                    Some(Estimate::exact((v[b] - v[a]) / (grid[b] - grid[a])))
                })
                .collect()
        };
        Ok(DegreeProfile {
            filtration,
            k,
            dt_k: diff(&t_k),
            dt_km1: diff(&t_km1),
            t_k: t_k.into_iter().map(Estimate::exact).collect(),
            t_km1: t_km1.into_iter().map(Estimate::exact).collect(),
            critical_flags: vec![false; n],
            grid,
            n_samples: 0,
            seed: 0,
            degeneracy_warning: false,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn unflagged(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|i| !self.critical_flags[*i])
    }

    /// Index of a grid point equal to `r` up to relative `1e-9`.
    pub fn index_of(&self, r: f64) -> Option<usize> {
        self.grid
            .iter()
            .position(|g| (g - r).abs() <= 1e-9 * r.abs().max(g.abs()))
    }

    /// `t_k` interpolated log-linearly (linearly in `log r`, `log t`);
    /// `None` outside the grid or where `t_k <= 0`.
    pub fn t_k_interpolated(&self, r: f64) -> Option<f64> {
        interpolate_log(&self.grid, &self.t_k, r)
    }

    pub fn t_km1_interpolated(&self, r: f64) -> Option<f64> {
        interpolate_log(&self.grid, &self.t_km1, r)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,t_k,t_k_err,t_km1,t_km1_err,dt_k,dt_k_err,dt_km1,dt_km1_err,critical_flag\n");
        let opt = |e: Option<Estimate>| match e {
            Some(e) => (format!("{}", e.value), format!("{}", e.err)),
            None => (String::new(), String::new()),
        };
        for i in 0..self.len() {
            let (dk, dke) = opt(self.dt_k[i]);
            let (dm, dme) = opt(self.dt_km1[i]);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                self.grid[i],
                self.t_k[i].value,
                self.t_k[i].err,
                self.t_km1[i].value,
                self.t_km1[i].err,
                dk,
                dke,
                dm,
                dme,
                self.critical_flags[i]
            );
        }
        out
    }
}

fn interpolate_log(grid: &[f64], values: &[Estimate], r: f64) -> Option<f64> {
    let n = grid.len();
    if n == 0 || r < grid[0] * (1.0 - 1e-12) || r > grid[n - 1] * (1.0 + 1e-12) {
        return None;
    }
    let j = grid.partition_point(|g| *g < r).min(n - 1);
    if (grid[j] - r).abs() <= 1e-12 * r || j == 0 {
        let v = values[j].value;
        return (v > 0.0).then_some(v);
    }
    let (r0, r1) = (grid[j - 1], grid[j]);
    let (v0, v1) = (values[j - 1].value, values[j].value);
    if v0 <= 0.0 || v1 <= 0.0 {
        return None;
    }
    let s = (r / r0).ln() / (r1 / r0).ln();
    Some((v0.ln() + s * (v1 / v0).ln()).exp())
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("empty grid".into()));
    }
    if grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidGrid("grid radii must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `min, min q, min q^2, ...` up to `max`.
pub fn geometric_grid(min: f64, max: f64, ratio: f64) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && ratio > 1.0 && max.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "geometric grid needs 0 < min <= max and ratio > 1, got ({min}, {max}, {ratio})"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0;
    loop {
        let r = min * ratio.powi(i);
        if r > max * (1.0 + 1e-9) {
            break;
        }
        grid.push(r);
        i += 1;
    }
    Ok(grid)
}

/// Coefficient matrix of the form wedged against `f^* omega^{k-1}`:
/// `i d tau ^ dbar tau` (matrix `2 v v*` with `v = del tau`) for sublevel
/// filtrations and `beta` for balls.
pub(crate) fn complementary_form(filtration: &Filtration, z: &[C64]) -> HermitianMatrix {
    match filtration.kind() {
        FiltrationKind::TauSublevel => {
            HermitianMatrix::rank_one(&filtration.exhaustion().del_tau(z), RANK_ONE_DOMINATION)
        }
        FiltrationKind::EuclideanBall => HermitianMatrix::identity(filtration.dimension()),
    }
}

/// Densities of `f^* omega^k` and of the `t_{k-1}` integrand at `z`.
pub fn densities_at(map: &HolomorphicMapSpec, filtration: &Filtration, z: &[C64]) -> Result<(f64, f64)> {
    let jet = map.jet(z);
    let h = map.pullback_metric(&jet);
    let top = top_wedge_density(&h)?.value();
    let mixed = mixed_wedge_density(&h, &complementary_form(filtration, z))?.value();
    Ok((top, mixed))
}

fn integrate(map: &HolomorphicMapSpec, filtration: &Filtration, batch: &SampleBatch) -> Result<(Estimate, Estimate)> {
    let values: Vec<(f64, f64)> = (0..batch.len())
        .into_par_iter()
        .map(|i| densities_at(map, filtration, batch.point(i)))
        .collect::<Result<_>>()?;
    let (top, mixed): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
    Ok((batch.estimate(&top), batch.estimate(&mixed)))
}

fn check_dimensions(map: &HolomorphicMapSpec, filtration: &Filtration) -> Result<()> {
    if map.domain_dimension() != filtration.dimension() {
        return Err(Error::DimensionMismatch(format!(
            "map domain has dimension {} but the exhaustion lives on C^{}",
            map.domain_dimension(),
            filtration.dimension()
        )));
    }
    Ok(())
}

/// Profile along any filtration with an explicit sampler configuration.
pub fn profile_with(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    grid: &[f64],
    n_samples: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<DegreeProfile> {
    check_dimensions(map, filtration)?;
    check_grid(grid)?;
    let r0 = filtration.r0_level();
    if grid[0] <= r0 {
        return Err(Error::InvalidGrid(format!(
            "grid minimum {} must exceed r0 = {r0}",
            grid[0]
        )));
    }
    let flags: Vec<bool> = grid.iter().map(|r| filtration.is_flagged(*r, cfg)).collect();
    if flags.iter().all(|f| *f) {
        return Err(Error::UnusableGrid);
    }
    type Row = (Estimate, Estimate, Option<Estimate>, Option<Estimate>);
    let rows: Vec<Row> = grid
        .par_iter()
        .zip(flags.par_iter())
        .map(|(r, flagged)| -> Result<Row> {
            let bulk = filtration.sample_bulk(*r, n_samples, seed, cfg)?;
            let (tk, tkm1) = integrate(map, filtration, &bulk)?;
            if *flagged {
                return Ok((tk, tkm1, None, None));
            }
            let level = filtration.sample_level(*r, n_samples, seed, cfg)?;
            let (dk, dkm1) = integrate(map, filtration, &level)?;
            Ok((tk, tkm1, Some(dk), Some(dkm1)))
        })
        .collect::<Result<_>>()?;
    let t_k: Vec<Estimate> = rows.iter().map(|r| r.0).collect();
    let degeneracy_warning = map.nondegenerate_hint() && t_k.iter().all(|t| t.value.abs() <= 3.0 * t.err);
    Ok(DegreeProfile {
        filtration: filtration.kind(),
        k: filtration.dimension(),
        grid: grid.to_vec(),
        t_k,
        t_km1: rows.iter().map(|r| r.1).collect(),
        dt_k: rows.iter().map(|r| r.2).collect(),
        dt_km1: rows.iter().map(|r| r.3).collect(),
        critical_flags: flags,
        n_samples,
        seed,
        degeneracy_warning,
    })
}

/// `t_k`, `t_{k-1}` on `V(r) = {tau < r}` with the default rejection sampler.
pub fn compute_profile(
    map: &HolomorphicMapSpec,
    exh: &ExhaustionSpec,
    grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<DegreeProfile> {
    profile_with(map, &Filtration::tau(exh.clone()), grid, n_samples, seed, &SamplerConfig::default())
}

/// `a_k`, `a_{k-1}` on Euclidean balls `B(0, r)`.
pub fn compute_ball_profile(
    map: &HolomorphicMapSpec,
    radius_grid: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<DegreeProfile> {
    let filtration = Filtration::ball(map.domain_dimension())?;
    profile_with(map, &filtration, radius_grid, n_samples, seed, &SamplerConfig::default())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconciliationRow {
    /// Euclidean radius; the sublevel profile is read at `r^2`.
    pub r: f64,
    pub a_k: Estimate,
    pub t_k_at_r2: Estimate,
    pub discrepancy: Estimate,
    pub agree: bool,
    /// `2 r t'_{k-1}(r^2)`.
    pub bridge_lhs: Option<Estimate>,
    /// `K(k) r^2 a'_{k-1}(r)`.
    pub bridge_rhs: Option<Estimate>,
    pub bridge_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reconciliation {
    pub k_constant: f64,
    pub rows: Vec<ReconciliationRow>,
    pub max_discrepancy: f64,
    pub all_agree: bool,
    pub bridge_verified: bool,
}

/// Compares `a_k(r)` with `t_k(r^2)` and checks
/// `2 r t'_{k-1}(r^2) <= K r^2 a'_{k-1}(r)` on the shared radii, each within 3 sigma.
pub fn reconcile_tau_vs_ball(
    profile_tau: &DegreeProfile,
    profile_ball: &DegreeProfile,
    k_constant: f64,
) -> Result<Reconciliation> {
    if profile_tau.filtration != FiltrationKind::TauSublevel
        || profile_ball.filtration != FiltrationKind::EuclideanBall
    {
        return Err(Error::Alignment("expected a sublevel profile and a ball profile".into()));
    }
    if profile_tau.k != profile_ball.k {
        return Err(Error::Alignment("profiles have different dimensions".into()));
    }
    let mut rows = Vec::new();
    for (i, r) in profile_ball.grid.iter().enumerate() {
        let Some(j) = profile_tau.index_of(r * r) else {
            continue;
        };
        let a_k = profile_ball.t_k[i];
        let t_k = profile_tau.t_k[j];
        let discrepancy = a_k.minus(t_k);
        let (bridge_lhs, bridge_rhs, bridge_holds) = match (profile_tau.dt_km1[j], profile_ball.dt_km1[i]) {
            (Some(dt), Some(da)) => {
                let lhs = dt.scale(2.0 * r);
                let rhs = da.scale(k_constant * r * r);
                let holds = lhs.value <= rhs.value + 3.0 * lhs.err.hypot(rhs.err);
                (Some(lhs), Some(rhs), Some(holds))
            }
            _ => (None, None, None),
        };
        rows.push(ReconciliationRow {
            r: *r,
            a_k,
            t_k_at_r2: t_k,
            discrepancy,
            agree: discrepancy.value.abs() <= 3.0 * discrepancy.err,
            bridge_lhs,
            bridge_rhs,
            bridge_holds,
        });
    }
    if rows.is_empty() {
        return Err(Error::Alignment(
            "no ball radius r has r^2 on the sublevel grid".into(),
        ));
    }
    let max_discrepancy = rows.iter().map(|r| r.discrepancy.value.abs()).fold(0.0, f64::max);
    Ok(Reconciliation {
        k_constant,
        all_agree: rows.iter().all(|r| r.agree),
        bridge_verified: rows.iter().all(|r| r.bridge_holds != Some(false))
            && rows.iter().any(|r| r.bridge_holds.is_some()),
        max_discrepancy,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exhaustion::{catalog_exhaustion, ExhaustionName};
    use crate::geometry::{catalog_map, MapName};
    use std::f64::consts::PI;

    fn norm_squared(k: usize) -> ExhaustionSpec {
        catalog_exhaustion(&ExhaustionName::NormSquared { k, r0: None }).unwrap()
    }

    #[test]
    fn grid_construction() {
        let g = geometric_grid(1.0, 10.0, 2.0).unwrap();
        assert_eq!(g, vec![1.0, 2.0, 4.0, 8.0]);
        assert!(geometric_grid(1.0, 10.0, 1.0).is_err());
        assert!(check_grid(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn km1_of_identity_curve_is_disc_integral() {
        let map = catalog_map(&MapName::PowerCurve { d: 1 }).unwrap();
        let p = compute_profile(&map, &norm_squared(1), &[0.5, 1.0, 2.0], 200_000, 3).unwrap();
        for (i, r) in p.grid.iter().enumerate() {
            let t = p.t_km1[i];
            assert!(t.agrees_with(Estimate::exact(PI * r * r), 3.0, 0.0), "{r}: {t:?}");
            let dt = p.dt_km1[i].unwrap();
            assert!(dt.agrees_with(Estimate::exact(2.0 * PI * r), 3.0, 1e-5 * r), "{r}: {dt:?}");
        }
    }

    #[test]
    fn ball_area_is_exact() {
        let map = catalog_map(&MapName::ExpCurve).unwrap();
        let p = compute_ball_profile(&map, &[1.0, 3.0], 1000, 0).unwrap();
        for (i, r) in p.grid.iter().enumerate() {
            assert!((p.t_km1[i].value - PI * r * r).abs() < 1e-12 * r * r);
        }
    }

    #[test]
    fn degenerate_map_has_zero_volume() {
        let map = catalog_map(&MapName::DegenerateMap { c_re: 0.5, c_im: 0.0 }).unwrap();
        let p = compute_profile(&map, &norm_squared(1), &[1.0, 2.0], 1000, 0).unwrap();
        assert!(p.t_k.iter().all(|t| t.value == 0.0));
        assert!(!p.degeneracy_warning);
    }

    #[test]
    fn grid_below_r0_is_refused() {
        let map = catalog_map(&MapName::PowerCurve { d: 1 }).unwrap();
        let exh = catalog_exhaustion(&ExhaustionName::NormSquared { k: 1, r0: Some(1.0) }).unwrap();
        assert!(matches!(
            compute_profile(&map, &exh, &[0.5, 2.0], 10, 0),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn all_flagged_grid_is_unusable() {
        let map = catalog_map(&MapName::PowerCurve { d: 1 }).unwrap();
        let r = compute_profile(&map, &norm_squared(1), &[1e-7, 2e-7], 10, 0);
        assert_eq!(r.unwrap_err(), Error::UnusableGrid);
    }

    #[test]
    fn dimension_mismatch() {
        let map = catalog_map(&MapName::PowerCurve { d: 1 }).unwrap();
        assert!(matches!(
            compute_profile(&map, &norm_squared(2), &[1.0], 10, 0),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let p = DegreeProfile::from_values(FiltrationKind::TauSublevel, 1, vec![1.0, 2.0], vec![1.0, 2.0], vec![0.5, 1.5])
            .unwrap();
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "r,t_k,t_k_err,t_km1,t_km1_err,dt_k,dt_k_err,dt_km1,dt_km1_err,critical_flag"
        );
        assert_eq!(lines.next().unwrap(), "1,1,0,0.5,0,1,0,1,0,false");
    }

    #[test]
    fn log_interpolation() {
        let p = DegreeProfile::from_values(
            FiltrationKind::TauSublevel,
            1,
            vec![1.0, 4.0],
            vec![1.0, 64.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        assert!((p.t_k_interpolated(2.0).unwrap() - 8.0).abs() < 1e-12);
        assert!(p.t_k_interpolated(5.0).is_none());
    }

    #[test]
    fn identical_profiles_reconcile_trivially() {
        let tau = DegreeProfile::from_values(FiltrationKind::TauSublevel, 1, vec![1.0, 4.0], vec![1.0, 2.0], vec![1.0, 1.0])
            .unwrap();
        let mut ball = tau.clone();
        ball.filtration = FiltrationKind::EuclideanBall;
        ball.grid = vec![1.0, 2.0];
        let rec = reconcile_tau_vs_ball(&tau, &ball, 2.0).unwrap();
        assert_eq!(rec.max_discrepancy, 0.0);
        assert!(rec.all_agree);
    }

    #[test]
    fn reconciliation_needs_shared_radii() {
        let tau = DegreeProfile::from_values(FiltrationKind::TauSublevel, 1, vec![3.0], vec![1.0], vec![1.0]).unwrap();
        let mut ball = tau.clone();
        ball.filtration = FiltrationKind::EuclideanBall;
        assert!(matches!(reconcile_tau_vs_ball(&tau, &ball, 2.0), Err(Error::Alignment(_))));
    }
}
