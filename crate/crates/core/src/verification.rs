//! Checks of `||d f_*[V(r)]||^2 <= K t'_{k-1}(r) t'_k(r)` along radius
//! grids, and regularity scans of degree profiles.
//!
//! The boundary mass is a dictionary lower bound, so a PASS is evidence
//! consistent with the inequality, while a FAIL (a ratio growing without
//! bound) points at the implementation rather than the inequality.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::currents::{level_boundary_mass, TestForm};
use crate::degrees::{profile_with, DegreeProfile};
use crate::estimate::{linear_fit, Estimate};
use crate::exhaustion::{ExhaustionSpec, Filtration, FiltrationKind, SamplerConfig};
use crate::geometry::HolomorphicMapSpec;
use crate::{Error, Result};

pub const ORIENTATION: &str = "boundary masses are dictionary lower bounds: PASS is consistent with a finite constant, \
FAIL indicates an implementation defect rather than a counterexample";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowFlag {
    Ok,
    /// `rhs_core` not significantly positive; excluded from the summary.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityRow {
    pub r: f64,
    /// `||dT||^2` with `||dT||` the dictionary lower bound.
    pub lhs: Estimate,
    /// `t'_{k-1}(r) t'_k(r)`.
    pub rhs_core: Estimate,
    pub ratio: Option<Estimate>,
    pub flag: RowFlag,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendFit {
    pub slope: f64,
    pub slope_err: f64,
    pub points: usize,
    pub r_from: f64,
    pub r_to: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InequalityReport {
    pub filtration: FiltrationKind,
    pub rows: Vec<InequalityRow>,
    /// Empirical constant: the largest conclusive ratio.
    pub sup_ratio: Option<Estimate>,
    pub sup_location: Option<f64>,
    pub trend: Option<TrendFit>,
    pub verdict: Verdict,
    pub dictionary_size: usize,
    pub n_samples: usize,
    pub seed: u64,
    pub orientation: String,
}

impl InequalityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,lhs,lhs_err,rhs_core,rhs_err,ratio,ratio_err,flag\n");
        for row in &self.rows {
            let (ratio, ratio_err) = match row.ratio {
                Some(q) => (q.value.to_string(), q.err.to_string()),
                None => (String::new(), String::new()),
            };
            let flag = match row.flag {
                RowFlag::Ok => "ok",
                RowFlag::Inconclusive => "inconclusive",
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                row.r, row.lhs.value, row.lhs.err, row.rhs_core.value, row.rhs_core.err, ratio, ratio_err, flag
            );
        }
        out
    }

    pub fn row_at(&self, r: f64) -> Option<&InequalityRow> {
        self.rows
            .iter()
            .find(|row| (row.r - r).abs() <= 1e-9 * r.abs().max(row.r.abs()))
    }
}

/// Slope of `log y` against `log r` over the last decade of the supplied points.
pub fn last_decade_trend(points: &[(f64, Estimate)]) -> Option<TrendFit> {
    let r_max = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let tail: Vec<&(f64, Estimate)> = points
        .iter()
        .filter(|(r, q)| *r >= r_max / 10.0 * (1.0 - 1e-12) && q.value > 0.0)
        .collect();
    if tail.len() < 3 {
        return None;
    }
    let x: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1.value.ln()).collect();
    let s: Vec<f64> = tail.iter().map(|p| p.1.err / p.1.value).collect();
    let (_, slope, slope_err) = linear_fit(&x, &y, &s)?;
    Some(TrendFit {
        slope,
        slope_err,
        points: tail.len(),
        r_from: tail[0].0,
        r_to: r_max,
    })
}

/// Inequality rows from a profile and boundary masses computed on the
/// profile's own level batches (same seed, same radii).
pub fn verify_with_profile(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    profile: &DegreeProfile,
    dictionary: &[TestForm],
    cfg: &SamplerConfig,
) -> Result<InequalityReport> {
    if profile.filtration != filtration.kind() {
        return Err(Error::Alignment("profile was computed along another filtration".into()));
    }
    let mut rows = Vec::new();
    for i in profile.unflagged() {
        let (Some(dk), Some(dkm1)) = (profile.dt_k[i], profile.dt_km1[i]) else {
            continue;
        };
        let r = profile.grid[i];
        let bm = level_boundary_mass(map, filtration, r, dictionary, profile.n_samples, profile.seed, cfg)?;
        let lhs = bm.value.times(bm.value);
        let rhs_core = dkm1.times(dk);
        let conclusive = rhs_core.value > 3.0 * rhs_core.err && rhs_core.value > 0.0;
        rows.push(InequalityRow {
            r,
            lhs,
            rhs_core,
            ratio: conclusive.then(|| lhs.over(rhs_core)),
            flag: if conclusive { RowFlag::Ok } else { RowFlag::Inconclusive },
        });
    }
    let conclusive: Vec<(f64, Estimate)> = rows.iter().filter_map(|r| r.ratio.map(|q| (r.r, q))).collect();
    let sup = conclusive
        .iter()
        .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
        .cloned();
    let trend = last_decade_trend(&conclusive);
    let verdict = match &trend {
        Some(t) if t.slope <= 3.0 * t.slope_err => Verdict::Pass,
        Some(_) => Verdict::Fail,
        None => Verdict::Inconclusive,
    };
    Ok(InequalityReport {
        filtration: filtration.kind(),
        rows,
        sup_ratio: sup.map(|s| s.1),
        sup_location: sup.map(|s| s.0),
        trend,
        verdict,
        dictionary_size: dictionary.len(),
        n_samples: profile.n_samples,
        seed: profile.seed,
        orientation: ORIENTATION.into(),
    })
}

/// Profile plus inequality report along any filtration.
#[allow(clippy::too_many_arguments)]
pub fn verify_inequality_with(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    grid: &[f64],
    dictionary: &[TestForm],
    n_samples: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<(DegreeProfile, InequalityReport)> {
    let profile = profile_with(map, filtration, grid, n_samples, seed, cfg)?;
    let report = verify_with_profile(map, filtration, &profile, dictionary, cfg)?;
    Ok((profile, report))
}

/// Inequality report with the default sampler; `EuclideanBall` requires `norm_squared`.
#[allow(clippy::too_many_arguments)]
pub fn verify_inequality(
    map: &HolomorphicMapSpec,
    exh: &ExhaustionSpec,
    grid: &[f64],
    dictionary: &[TestForm],
    n_samples: usize,
    seed: u64,
    filtration_kind: FiltrationKind,
) -> Result<InequalityReport> {
    let filtration = Filtration::new(exh.clone(), filtration_kind)?;
    verify_inequality_with(map, &filtration, grid, dictionary, n_samples, seed, &SamplerConfig::default())
        .map(|(_, report)| report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceRow {
    pub r: f64,
    pub ratio_ball: Estimate,
    pub ratio_tau: Estimate,
    /// `ratio_ball <= (K/4) ratio_tau` within 3 sigma.
    pub holds: bool,
}

/// Ball report at `r` against the sublevel report at `r^2` for `tau = |z|^2`.
///
/// Both sides share the current `f_*[B(0, r)]`, and `a'_k(r) = 2 r t'_k(r^2)`
/// together with the bridge inequality give `ratio_ball <= (K/4) ratio_tau`.
pub fn ball_tau_coherence(
    ball: &InequalityReport,
    tau: &InequalityReport,
    k_constant: f64,
) -> Result<Vec<CoherenceRow>> {
    if ball.filtration != FiltrationKind::EuclideanBall || tau.filtration != FiltrationKind::TauSublevel {
        return Err(Error::Alignment("expected a ball report and a sublevel report".into()));
    }
    let mut rows = Vec::new();
    for row in &ball.rows {
        let (Some(qb), Some(qt)) = (row.ratio, tau.row_at(row.r * row.r).and_then(|t| t.ratio)) else {
            continue;
        };
        let bound = qt.scale(k_constant / 4.0);
        rows.push(CoherenceRow {
            r: row.r,
            ratio_ball: qb,
            ratio_tau: qt,
            holds: qb.value <= bound.value + 3.0 * qb.err.hypot(bound.err),
        });
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    TK,
    TKm1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuityRow {
    pub quantity: Quantity,
    /// Last unflagged radius below and first above the flagged span.
    pub r_left: f64,
    pub r_right: f64,
    /// Difference of the two one-sided linear extrapolations at the span midpoint.
    pub jump: Estimate,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeRow {
    pub quantity: Quantity,
    pub r_left: f64,
    pub r_right: f64,
    /// `t(r_right) - t(r_left)` minus the trapezoidal integral of the derivative.
    pub mismatch: Estimate,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularityReport {
    pub points_per_decade: f64,
    pub sparse_grid: bool,
    pub flagged_points: usize,
    pub continuity: Vec<ContinuityRow>,
    pub derivative: Vec<DerivativeRow>,
    pub continuity_pass: bool,
    pub derivative_pass: bool,
}

fn series(profile: &DegreeProfile, q: Quantity) -> (&[Estimate], &[Option<Estimate>]) {
    match q {
        Quantity::TK => (&profile.t_k, &profile.dt_k),
        Quantity::TKm1 => (&profile.t_km1, &profile.dt_km1),
    }
}

/// Continuity across flagged spans and derivative consistency on unflagged spans.
///
/// Continuity: the linear extrapolations from the nearest unflagged point on
/// each side must meet at the span midpoint within `3 sigma` plus the kink
/// allowance `|d_left - d_right| gap / 2`. Derivative consistency: on each
/// pair of adjacent unflagged points, `t(b) - t(a)` must equal the
/// trapezoidal integral of `t'` within `3 sigma` plus twice the trapezoid
/// error estimated from second differences of `t'`.
pub fn regularity_scan(profile: &DegreeProfile) -> RegularityReport {
    let n = profile.len();
    let decades = if n > 1 {
        (profile.grid[n - 1] / profile.grid[0]).log10()
    } else {
        0.0
    };
    let points_per_decade = if decades > 0.0 { (n - 1) as f64 / decades } else { 0.0 };
    let mut continuity = Vec::new();
    let mut derivative = Vec::new();
    for q in [Quantity::TK, Quantity::TKm1] {
        let (t, dt) = series(profile, q);
        // flagged spans
        let mut i = 0;
        while i < n {
            if !profile.critical_flags[i] {
                i += 1;
                continue;
            }
            let start = i;
            while i < n && profile.critical_flags[i] {
                i += 1;
            }
            if start == 0 || i == n {
                continue;
            }
            let (l, rr) = (start - 1, i);
            let (Some(dl), Some(dr)) = (dt[l], dt[rr]) else {
                continue;
            };
            let (xl, xr) = (profile.grid[l], profile.grid[rr]);
            let mid = 0.5 * (xl + xr);
            let from_left = Estimate::new(t[l].value + dl.value * (mid - xl), t[l].err.hypot(dl.err * (mid - xl)));
            let from_right = Estimate::new(t[rr].value - dr.value * (xr - mid), t[rr].err.hypot(dr.err * (xr - mid)));
            let jump = from_right.minus(from_left);
            let tolerance = 3.0 * jump.err + (dl.value - dr.value).abs() * (xr - xl) / 2.0;
            continuity.push(ContinuityRow {
                quantity: q,
                r_left: xl,
                r_right: xr,
                jump,
                tolerance,
                pass: jump.value.abs() <= tolerance,
            });
        }
        // adjacent unflagged pairs
        for a in 0..n.saturating_sub(1) {
            let b = a + 1;
            if profile.critical_flags[a] || profile.critical_flags[b] {
                continue;
            }
            let (Some(da), Some(db)) = (dt[a], dt[b]) else {
                continue;
            };
            let h = profile.grid[b] - profile.grid[a];
            let integral = Estimate::new(0.5 * h * (da.value + db.value), 0.5 * h * da.err.hypot(db.err));
            let mismatch = t[b].minus(t[a]).minus(integral);
            // second derivative of t' from the neighbouring derivative values
            let curvature = [a.checked_sub(1), Some(b + 1).filter(|c| *c < n)]
                .into_iter()
                .flatten()
                .filter_map(|c| {
                    let (i0, i1, i2) = if c < a { (c, a, b) } else { (a, b, c) };
                    let (d0, d1, d2) = (dt[i0]?, dt[i1]?, dt[i2]?);
                    let (x0, x1, x2) = (profile.grid[i0], profile.grid[i1], profile.grid[i2]);
                    let s1 = (d1.value - d0.value) / (x1 - x0);
                    let s2 = (d2.value - d1.value) / (x2 - x1);
                    Some((2.0 * (s2 - s1) / (x2 - x0)).abs())
                })
                .fold(0.0, f64::max);
            let tolerance = 3.0 * mismatch.err + 2.0 * curvature * h.powi(3) / 12.0;
            derivative.push(DerivativeRow {
                quantity: q,
                r_left: profile.grid[a],
                r_right: profile.grid[b],
                mismatch,
                tolerance,
                pass: mismatch.value.abs() <= tolerance,
            });
        }
    }
    RegularityReport {
        points_per_decade,
        sparse_grid: points_per_decade < 3.0,
        flagged_points: profile.critical_flags.iter().filter(|f| **f).count(),
        continuity_pass: continuity.iter().all(|r| r.pass),
        derivative_pass: derivative.iter().all(|r| r.pass),
        continuity,
        derivative,
    }
}
