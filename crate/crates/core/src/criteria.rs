//! Finite-type detection, doubling radii, the two radius selectors and
//! convergence diagnostics for the selected normalized currents.
//!
//! A `limsup` is never witnessed by a finite grid; hypotheses are judged
//! on the last decade of the grid, by the maximum there and by the fitted
//! log-log trend.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::currents::{
    boundary_mass, build_current_with, level_boundary_mass, pair, CurrentApproximant, FormKind, Normalization,
    TestForm,
};
use crate::degrees::DegreeProfile;
use crate::estimate::{linear_fit, Estimate};
use crate::exhaustion::{Filtration, SamplerConfig};
use crate::geometry::HolomorphicMapSpec;
use crate::verification::{last_decade_trend, TrendFit};
use crate::{Error, Result};

/// Required log-log decay of the first criterion's hypothesis quantity.
pub const HYPOTHESIS_SLOPE_MARGIN: f64 = -0.1;
/// Sub-grid points scanned in each `[R_n, 2 R_n]`.
pub const SELECTION_SUBGRID: usize = 9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteTypeFit {
    pub c1: f64,
    pub c2: f64,
    pub c2_err: f64,
    pub r1: f64,
    /// Trend of the local log-log slopes over the tail, with its error.
    pub slope_trend: f64,
    pub slope_trend_err: f64,
    pub is_finite_type: bool,
}

/// Fits `t_k <= C1 r^C2` on the last decade and tests for super-polynomial growth.
pub fn fit_finite_type(profile: &DegreeProfile) -> Result<FiniteTypeFit> {
    let pts: Vec<(f64, Estimate)> = profile
        .unflagged()
        .filter(|i| profile.t_k[*i].value > 0.0)
        .map(|i| (profile.grid[i], profile.t_k[i]))
        .collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "finite-type fit needs >= 10 unflagged points with t_k > 0, got {}",
            pts.len()
        )));
    }
    let span = (pts[pts.len() - 1].0 / pts[0].0).log10();
    if span < 1.5 {
        return Err(Error::InsufficientData(format!(
            "finite-type fit needs >= 1.5 decades, got {span:.2}"
        )));
    }
    let r_max = pts[pts.len() - 1].0;
    let tail: Vec<&(f64, Estimate)> = pts.iter().filter(|p| p.0 >= r_max / 10.0 * (1.0 - 1e-12)).collect();
    let x: Vec<f64> = tail.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1.value.ln()).collect();
    let s: Vec<f64> = tail.iter().map(|p| p.1.err / p.1.value).collect();
    let (_, c2, c2_err) = linear_fit(&x, &y, &s)
        .ok_or_else(|| Error::InsufficientData("degenerate tail for the finite-type fit".into()))?;
    let c2 = c2.max(0.0);
    let c1 = tail
        .iter()
        .map(|p| p.1.value / p.0.powf(c2))
        .fold(0.0, f64::max);
    // local slopes between consecutive tail points
    let mut lx = Vec::new();
    let mut ls = Vec::new();
    let mut le = Vec::new();
    for w in tail.windows(2) {
        let dx = (w[1].0 / w[0].0).ln();
        lx.push(0.5 * (w[0].0.ln() + w[1].0.ln()));
        ls.push((w[1].1.value / w[0].1.value).ln() / dx);
        le.push((w[0].1.err / w[0].1.value).hypot(w[1].1.err / w[1].1.value) / dx);
    }
    let (_, trend, trend_err) = linear_fit(&lx, &ls, &le)
        .ok_or_else(|| Error::InsufficientData("too few tail points for a slope trend".into()))?;
    Ok(FiniteTypeFit {
        c1,
        c2,
        c2_err,
        r1: tail[0].0,
        slope_trend: trend,
        slope_trend_err: trend_err,
        is_finite_type: trend <= 3.0 * trend_err + 1e-9,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingRadii {
    pub k_doubling: f64,
    /// Ascending; consecutive radii differ by at least a factor 2.
    pub radii: Vec<f64>,
    /// `t_k(2R) / t_k(R)` at each selected radius.
    pub ratios: Vec<f64>,
    pub min_ratio: f64,
}

/// Default doubling constant `2 (2^C2 + 1)`.
pub fn default_k_doubling(fit: &FiniteTypeFit) -> f64 {
    2.0 * (2f64.powf(fit.c2) + 1.0)
}

/// Up to `count` radii `R` with `t_k(2R) <= K t_k(R)`, chosen greedily from
/// the largest grid radius downward with each next radius at most half the
/// previous one. `t_k(2R)` is interpolated log-linearly.
pub fn doubling_radii(profile: &DegreeProfile, k_doubling: Option<f64>, count: usize) -> Result<DoublingRadii> {
    let k_doubling = match k_doubling {
        Some(k) => k,
        None => default_k_doubling(&fit_finite_type(profile)?),
    };
    let mut candidates = Vec::new();
    let mut min_ratio = f64::INFINITY;
    for i in profile.unflagged() {
        let r = profile.grid[i];
        let t = profile.t_k[i];
        if t.value <= 3.0 * t.err || t.value <= 0.0 {
            continue;
        }
        let Some(t2) = profile.t_k_interpolated(2.0 * r) else {
            continue;
        };
        let ratio = t2 / t.value;
        min_ratio = min_ratio.min(ratio);
        if ratio <= k_doubling {
            candidates.push((r, ratio));
        }
    }
    let mut radii = Vec::new();
    let mut ratios = Vec::new();
    let mut ceiling = f64::INFINITY;
    for (r, ratio) in candidates.into_iter().rev() {
        if radii.len() >= count {
            break;
        }
        if r <= ceiling * (1.0 + 1e-12) {
            radii.push(r);
            ratios.push(ratio);
            ceiling = r / 2.0;
        }
    }
    if radii.is_empty() {
        return Err(Error::SearchExhausted {
            min_ratio: if min_ratio.is_finite() { min_ratio } else { f64::NAN },
        });
    }
    radii.reverse();
    ratios.reverse();
    Ok(DoublingRadii {
        k_doubling,
        radii,
        ratios,
        min_ratio,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    Thm2,
    Thm3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisVerdict {
    Satisfied,
    Unsatisfied,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisTrend {
    pub values: Vec<(f64, Estimate)>,
    /// Maximum over the last decade.
    pub limsup_proxy: Option<Estimate>,
    pub trend: Option<TrendFit>,
    pub verdict: HypothesisVerdict,
}

fn last_decade_max(values: &[(f64, Estimate)]) -> Option<Estimate> {
    let r_max = values.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .filter(|v| v.0 >= r_max / 10.0 * (1.0 - 1e-12))
        .map(|v| v.1)
        .max_by(|a, b| a.value.total_cmp(&b.value))
}

/// `t_{k-1}(r) / (r^2 t_k(r))`; satisfied when it decays at least like
/// `r^{-0.1}` over the last decade (beyond 3 sigma).
pub fn thm2_hypothesis(profile: &DegreeProfile) -> HypothesisTrend {
    let values: Vec<(f64, Estimate)> = profile
        .unflagged()
        .filter(|i| profile.t_k[*i].value > 0.0)
        .map(|i| {
            let r = profile.grid[i];
            (r, profile.t_km1[i].over(profile.t_k[i]).scale(1.0 / (r * r)))
        })
        .collect();
    let trend = last_decade_trend(&values);
    let verdict = match &trend {
        Some(t) if t.slope + 3.0 * t.slope_err <= HYPOTHESIS_SLOPE_MARGIN => HypothesisVerdict::Satisfied,
        Some(_) => HypothesisVerdict::Unsatisfied,
        None => HypothesisVerdict::Undetermined,
    };
    HypothesisTrend {
        limsup_proxy: last_decade_max(&values),
        values,
        trend,
        verdict,
    }
}

/// `t'_{k-1}(r) / (r t_k(r)^{1-eps})`; satisfied when its last-decade maximum
/// is at most `L` and it is not growing (both within 3 sigma).
pub fn thm3_hypothesis(profile: &DegreeProfile, epsilon: f64, l: f64) -> HypothesisTrend {
    let values: Vec<(f64, Estimate)> = profile
        .unflagged()
        .filter(|i| profile.t_k[*i].value > 0.0)
        .filter_map(|i| {
            let r = profile.grid[i];
            let d = profile.dt_km1[i]?;
            let t = profile.t_k[i];
            let denom = t.value.powf(1.0 - epsilon);
            let denom_err = (1.0 - epsilon) * denom * t.err / t.value;
            Some((r, d.over(Estimate::new(denom, denom_err)).scale(1.0 / r)))
        })
        .collect();
    let trend = last_decade_trend(&values);
    let proxy = last_decade_max(&values);
    let verdict = match (&trend, proxy) {
        (Some(t), Some(p)) => {
            if p.value <= l + 3.0 * p.err && t.slope <= 3.0 * t.slope_err {
                HypothesisVerdict::Satisfied
            } else {
                HypothesisVerdict::Unsatisfied
            }
        }
        _ => HypothesisVerdict::Undetermined,
    };
    HypothesisTrend {
        limsup_proxy: proxy,
        values,
        trend,
        verdict,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectedRadius {
    pub n: usize,
    /// Doubling radius `R_n` (first criterion only).
    pub big_r: Option<f64>,
    pub r: f64,
    /// First criterion: `(1/R_n) sqrt(t_{k-1}(2R_n) t_k(2R_n))`.
    /// Second criterion: `(L + 1) eps(n)`.
    pub bound_value: Option<f64>,
    /// Boundary mass of the unit-mass current.
    pub boundary_mass: Estimate,
    pub raw_boundary_mass: Estimate,
    pub mass: Estimate,
    /// `r ||dT||^2 / (t'_{k-1} t_k^{1+eps})` (second criterion only).
    pub eps_n: Option<Estimate>,
    /// Whether the recorded bound holds within 3 sigma, when checkable.
    pub bound_holds: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionDiagnostics {
    /// Log-log slope of the normalized boundary mass across selected radii.
    pub boundary_mass_slope: Option<(f64, f64)>,
    /// Normalized boundary masses strictly decrease along the selection.
    pub normalized_mass_decreasing: bool,
    pub eps_nonincreasing: Option<bool>,
    pub bounds_hold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionReport {
    pub criterion: CriterionKind,
    pub hypothesis: HypothesisTrend,
    pub finite_type: Option<FiniteTypeFit>,
    pub doubling: Option<DoublingRadii>,
    pub epsilon: Option<f64>,
    pub l: Option<f64>,
    /// Empirical inequality constant used for the first criterion's soundness check.
    pub k_empirical: Option<f64>,
    pub selected: Vec<SelectedRadius>,
    /// Candidates skipped because `t'_{k-1}` was not significantly positive.
    pub skipped: Vec<f64>,
    pub diagnostics: SelectionDiagnostics,
}

impl CriterionReport {
    pub fn radii_csv(&self) -> String {
        let mut out = String::from("n,R_n,r_n,bound_value,boundary_mass,boundary_mass_err,eps_n\n");
        for s in &self.selected {
            let big_r = s.big_r.map(|v| v.to_string()).unwrap_or_default();
            let eps = s.eps_n.map(|v| v.value.to_string()).unwrap_or_default();
            let bound = s.bound_value.map(|v| v.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                s.n, big_r, s.r, bound, s.boundary_mass.value, s.boundary_mass.err, eps
            );
        }
        out
    }
}

/// A criterion report together with the unit-mass currents at the selected radii.
#[derive(Clone, Debug)]
pub struct Selection {
    pub report: CriterionReport,
    pub currents: Vec<CurrentApproximant>,
}

fn refuse_degenerate(map: &HolomorphicMapSpec, profile: &DegreeProfile) -> Result<()> {
    let vanishing = profile.t_k.iter().all(|t| t.value.abs() <= 3.0 * t.err);
    if !map.nondegenerate_hint() || vanishing {
        return Err(Error::DegenerateMap(map.label()));
    }
    Ok(())
}

fn diagnostics(selected: &[SelectedRadius], eps: bool) -> SelectionDiagnostics {
    let masses: Vec<Estimate> = selected.iter().map(|s| s.boundary_mass).collect();
    let slope = if selected.len() >= 2 && masses.iter().all(|m| m.value > 0.0) {
        let x: Vec<f64> = selected.iter().map(|s| s.r.ln()).collect();
        let y: Vec<f64> = masses.iter().map(|m| m.value.ln()).collect();
        let e: Vec<f64> = masses.iter().map(|m| m.err / m.value).collect();
        linear_fit(&x, &y, &e).map(|(_, b, be)| (b, be))
    } else {
        None
    };
    SelectionDiagnostics {
        boundary_mass_slope: slope,
        normalized_mass_decreasing: masses.windows(2).all(|w| w[1].value < w[0].value),
        eps_nonincreasing: eps.then(|| {
            selected
                .windows(2)
                .all(|w| w[1].eps_n.map(|e| e.value) <= w[0].eps_n.map(|e| e.value))
        }),
        bounds_hold: selected.iter().all(|s| s.bound_holds != Some(false)),
    }
}

/// First criterion: for each doubling radius `R_n` the radius in
/// `[R_n, 2 R_n]` minimizing the boundary-mass estimate on a sub-grid.
///
/// With `k_empirical` (the sup ratio from an inequality report) the
/// averaging bound `sqrt(K) (1/R_n) sqrt(t_{k-1}(2R_n) t_k(2R_n))` is checked.
#[allow(clippy::too_many_arguments)]
pub fn select_radii_thm2(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    profile: &DegreeProfile,
    dictionary: &[TestForm],
    r_sequence: &[f64],
    n_samples: usize,
    seed: u64,
    cfg: &SamplerConfig,
    k_empirical: Option<f64>,
) -> Result<Selection> {
    refuse_degenerate(map, profile)?;
    if r_sequence.is_empty() {
        return Err(Error::SearchExhausted { min_ratio: f64::NAN });
    }
    let hypothesis = thm2_hypothesis(profile);
    let mut selected = Vec::new();
    let mut currents = Vec::new();
    for (n, big_r) in r_sequence.iter().enumerate() {
        let subgrid: Vec<f64> = (0..SELECTION_SUBGRID)
            .map(|j| big_r * 2f64.powf(j as f64 / (SELECTION_SUBGRID - 1) as f64))
            .filter(|r| !filtration.is_flagged(*r, cfg))
            .collect();
        let masses: Vec<(f64, Estimate)> = subgrid
            .par_iter()
            .map(|r| {
                level_boundary_mass(map, filtration, *r, dictionary, n_samples, seed, cfg).map(|m| (*r, m.value))
            })
            .collect::<Result<_>>()?;
        let Some(&(r, _)) = masses.iter().min_by(|a, b| a.1.value.total_cmp(&b.1.value)) else {
            continue;
        };
        let current = build_current_with(map, filtration, r, n_samples, seed, Normalization::UnitMass, cfg)?;
        let normalized = boundary_mass(&current, dictionary)?.value;
        let raw = normalized.times(current.raw_mass());
        let bound_value = match (profile.t_km1_interpolated(2.0 * big_r), profile.t_k_interpolated(2.0 * big_r)) {
            (Some(a), Some(b)) => Some((a * b).sqrt() / big_r),
            _ => None,
        };
        let bound_holds = k_empirical
            .zip(bound_value)
            .map(|(k, b)| raw.value <= k.sqrt() * b + 3.0 * raw.err);
        selected.push(SelectedRadius {
            n: n + 1,
            big_r: Some(*big_r),
            r,
            bound_value,
            boundary_mass: normalized,
            raw_boundary_mass: raw,
            mass: current.raw_mass(),
            eps_n: None,
            bound_holds,
        });
        currents.push(current);
    }
    let diagnostics = diagnostics(&selected, false);
    Ok(Selection {
        report: CriterionReport {
            criterion: CriterionKind::Thm2,
            hypothesis,
            finite_type: None,
            doubling: None,
            epsilon: None,
            l: None,
            k_empirical,
            selected,
            skipped: Vec::new(),
            diagnostics,
        },
        currents,
    })
}

/// Second criterion: along the tail where the hypothesis quantity is at
/// most `L`, the ratio `eps(r) = r ||dT||^2 / (t'_{k-1} t_k^{1+eps})` is
/// computed and radii are selected at its local minima that set new
/// running minima, so `eps(n)` strictly decreases.
#[allow(clippy::too_many_arguments)]
pub fn select_radii_thm3(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    profile: &DegreeProfile,
    dictionary: &[TestForm],
    epsilon: f64,
    l: f64,
    n_samples: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<Selection> {
    refuse_degenerate(map, profile)?;
    if !(epsilon > 0.0 && epsilon < 1.0) || l.is_nan() || l <= 0.0 {
        return Err(Error::Config(format!(
            "epsilon must lie in (0, 1) and L > 0, got ({epsilon}, {l})"
        )));
    }
    let hypothesis = thm3_hypothesis(profile, epsilon, l);
    // tail on which the hypothesis quantity stays below L
    let start = hypothesis
        .values
        .iter()
        .rposition(|(_, q)| q.value > l + 3.0 * q.err)
        .map(|i| i + 1)
        .unwrap_or(0);
    let tail: Vec<f64> = hypothesis.values[start..].iter().map(|v| v.0).collect();
    let mut skipped = Vec::new();
    let mut ratios: Vec<(f64, Estimate, Estimate)> = Vec::new();
    let rows: Vec<Option<(f64, Estimate, Estimate)>> = tail
        .par_iter()
        .map(|r| -> Result<Option<(f64, Estimate, Estimate)>> {
            let i = profile.index_of(*r).expect("hypothesis radii come from the grid");
            let d = profile.dt_km1[i].expect("hypothesis radii carry derivatives");
            if d.value <= 3.0 * d.err || d.value <= 0.0 {
                return Ok(None);
            }
            let bm = level_boundary_mass(map, filtration, *r, dictionary, n_samples, seed, cfg)?.value;
            let t = profile.t_k[i];
            let tp = t.value.powf(1.0 + epsilon);
            let denom = d.times(Estimate::new(tp, (1.0 + epsilon) * tp * t.err / t.value));
            Ok(Some((*r, bm.times(bm).scale(*r).over(denom), bm)))
        })
        .collect::<Result<_>>()?;
    for (r, row) in tail.iter().zip(rows) {
        match row {
            Some(v) => ratios.push(v),
            None => skipped.push(*r),
        }
    }
    let mut picks = Vec::new();
    let mut best = f64::INFINITY;
    for i in 0..ratios.len() {
        let e = ratios[i].1.value;
        let left_ok = i == 0 || e <= ratios[i - 1].1.value;
        let right_ok = i + 1 == ratios.len() || e <= ratios[i + 1].1.value;
        if left_ok && right_ok && e < best {
            best = e;
            picks.push(i);
        }
    }
    let mut selected = Vec::new();
    let mut currents = Vec::new();
    for (n, i) in picks.into_iter().enumerate() {
        let (r, eps_n, _) = ratios[i];
        let current = build_current_with(map, filtration, r, n_samples, seed, Normalization::UnitMass, cfg)?;
        let normalized = boundary_mass(&current, dictionary)?.value;
        let lhs = normalized.times(normalized);
        let rhs = eps_n.scale(l + 1.0);
        selected.push(SelectedRadius {
            n: n + 1,
            big_r: None,
            r,
            bound_value: Some(rhs.value),
            boundary_mass: normalized,
            raw_boundary_mass: normalized.times(current.raw_mass()),
            mass: current.raw_mass(),
            eps_n: Some(eps_n),
            bound_holds: Some(lhs.value <= rhs.value + 3.0 * lhs.err.hypot(rhs.err)),
        });
        currents.push(current);
    }
    let diagnostics = diagnostics(&selected, true);
    Ok(Selection {
        report: CriterionReport {
            criterion: CriterionKind::Thm3,
            hypothesis,
            finite_type: None,
            doubling: None,
            epsilon: Some(epsilon),
            l: Some(l),
            k_empirical: None,
            selected,
            skipped,
            diagnostics,
        },
        currents,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassResidual {
    pub r: f64,
    pub residual: Estimate,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairwiseDistance {
    pub r_from: f64,
    pub r_to: f64,
    /// `max_Phi |<T_n, Phi> - <T_{n+1}, Phi>|` over the bulk dictionary.
    pub distance: Estimate,
    pub argmax: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformComparison {
    pub label: String,
    pub value: Estimate,
    pub uniform: f64,
    /// Relative deviation for nonzero uniform values, absolute otherwise.
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitDiagnostics {
    pub radii: Vec<f64>,
    pub mass_residuals: Vec<MassResidual>,
    pub boundary_masses: Vec<Estimate>,
    pub boundary_mass_slope: Option<(f64, f64)>,
    pub pairwise: Vec<PairwiseDistance>,
    pub distances_decreasing: bool,
    /// Smallest pull `value / sigma` of pairings with nonnegative bulk forms
    /// (absent when every such pairing is exact and nonnegative).
    pub min_positivity_pull: Option<f64>,
    pub positivity_ok: bool,
    /// Pairings of the last current against the bulk dictionary versus the
    /// unique normalized current on the target (when `dim X = k`).
    pub uniform: Vec<UniformComparison>,
    pub max_uniform_deviation: Option<f64>,
}

/// Cauchy-style diagnostics across a sequence of unit-mass currents.
pub fn limit_diagnostics(
    currents: &[CurrentApproximant],
    boundary_dictionary: &[TestForm],
    bulk_dictionary: &[TestForm],
) -> Result<LimitDiagnostics> {
    if bulk_dictionary.iter().any(|f| f.kind != FormKind::Bulk) {
        return Err(Error::KindMismatch("limit diagnostics pair bulk forms".into()));
    }
    let mut mass_residuals = Vec::new();
    let mut boundary_masses = Vec::new();
    let mut pairings: Vec<Vec<Estimate>> = Vec::new();
    let mut min_pull = f64::INFINITY;
    for current in currents {
        let unit = current.with_normalization(Normalization::UnitMass)?;
        let k = unit.dimension();
        let m = pair(&unit, &TestForm::omega_power(k))?.re;
        let residual = Estimate::new(m.value - 1.0, m.err);
        mass_residuals.push(MassResidual {
            r: unit.radius(),
            ok: residual.value.abs() <= 3.0 * residual.err + 1e-12,
            residual,
        });
        boundary_masses.push(boundary_mass(&unit, boundary_dictionary)?.value);
        let row: Vec<Estimate> = bulk_dictionary
            .iter()
            .map(|f| pair(&unit, f).map(|p| p.re))
            .collect::<Result<_>>()?;
        for (f, p) in bulk_dictionary.iter().zip(&row) {
            if f.weight.is_nonnegative() {
                let pull = if p.err > 0.0 {
                    p.value / p.err
                } else if p.value >= 0.0 {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                };
                min_pull = min_pull.min(pull);
            }
        }
        pairings.push(row);
    }
    let radii: Vec<f64> = currents.iter().map(|c| c.radius()).collect();
    let pairwise: Vec<PairwiseDistance> = (1..currents.len())
        .filter_map(|n| {
            pairings[n - 1]
                .iter()
                .zip(&pairings[n])
                .map(|(a, b)| {
                    let d = b.minus(*a);
                    Estimate::new(d.value.abs(), d.err)
                })
                .enumerate()
                .max_by(|a, b| a.1.value.total_cmp(&b.1.value))
                .map(|(argmax, distance)| PairwiseDistance {
                    r_from: radii[n - 1],
                    r_to: radii[n],
                    distance,
                    argmax,
                })
        })
        .collect();
    let slope = if boundary_masses.len() >= 2 && boundary_masses.iter().all(|m| m.value > 0.0) {
        let x: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let y: Vec<f64> = boundary_masses.iter().map(|m| m.value.ln()).collect();
        let e: Vec<f64> = boundary_masses.iter().map(|m| m.err / m.value).collect();
        linear_fit(&x, &y, &e).map(|(_, b, be)| (b, be))
    } else {
        None
    };
    let uniform: Vec<UniformComparison> = match (currents.last(), pairings.last()) {
        (Some(last), Some(row)) => bulk_dictionary
            .iter()
            .zip(row)
            .filter_map(|(f, p)| {
                let u = f.uniform_value(last.target())?;
                let deviation = if u != 0.0 {
                    (p.value - u).abs() / u.abs()
                } else {
                    p.value.abs()
                };
                Some(UniformComparison {
                    label: f.label.clone(),
                    value: *p,
                    uniform: u,
                    deviation,
                })
            })
            .collect(),
        _ => Vec::new(),
    };
    Ok(LimitDiagnostics {
        max_uniform_deviation: uniform.iter().map(|u| u.deviation).reduce(f64::max),
        uniform,
        distances_decreasing: pairwise.windows(2).all(|w| w[1].distance.value < w[0].distance.value),
        pairwise,
        positivity_ok: min_pull >= -3.0,
        min_positivity_pull: min_pull.is_finite().then_some(min_pull),
        boundary_mass_slope: slope,
        boundary_masses,
        mass_residuals,
        radii,
    })
}
