//! Pushforward currents `f_*[V(r)]`, test forms on projective targets and
//! boundary-mass lower bounds.
//!
//! Test forms are built from bihomogeneous monomials
//! `h = Z^a Zbar^b / |Z|^{2d}` (products over factors), which are smooth
//! functions on the target:
//! - boundary forms `psi dbar h ^ omega^{k-1}` of bidegree `(k-1, k)`,
//! - bulk forms `psi omega^k` of bidegree `(k, k)`,
//!
//! with `psi` either `1` or a modulus monomial `|Z^c|^2 / |Z|^{2e}`.
//! Every form carries a norm bound obtained by sampled maximization of its
//! pointwise comass bound with a 1.05 margin.
//!
//! The boundary pairing uses Stokes' theorem in coarea form:
//! `<d f_*[V(r)], Psi> = lim (1/2 delta) int_{r-delta < sigma < r+delta} d sigma ^ f^* Psi`,
//! whose integrand is `psi(f) * mixed(f^* omega, B)` with
//! `B_ab = -2i (d sigma/dz_a) (f^* dbar h)_b`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimate::{ComplexEstimate, Estimate};
use crate::exhaustion::{purpose, substream, ExhaustionSpec, Filtration, SampleBatch, SamplerConfig};
use crate::forms::{factorial, mixed_wedge_coefficient, top_wedge_density, CMatrix};
use crate::geometry::{HolomorphicMapSpec, MapJet, TargetManifoldSpec, TargetPoint};
use crate::{Error, Result, C64};

/// Number of target samples used to certify a norm bound.
pub const CERTIFICATION_SAMPLES: usize = 10_000;
pub const CERTIFICATION_MARGIN: f64 = 1.05;

/// `prod_f W_f^{alpha_f} conj(W_f)^{beta_f} / |W_f|^{2 d_f}` with `|alpha_f| = |beta_f| = d_f`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Monomial {
    pub alpha: Vec<Vec<u32>>,
    pub beta: Vec<Vec<u32>>,
}

fn cpow(z: C64, e: u32) -> C64 {
    if e == 0 {
        C64::new(1.0, 0.0)
    } else {
        z.powu(e)
    }
}

impl Monomial {
    pub fn new(alpha: Vec<Vec<u32>>, beta: Vec<Vec<u32>>) -> Result<Self> {
        if alpha.len() != beta.len()
            || alpha
                .iter()
                .zip(&beta)
                .any(|(a, b)| a.len() != b.len() || a.iter().sum::<u32>() != b.iter().sum::<u32>())
        {
            return Err(Error::KindMismatch(
                "monomial needs matching shapes and equal holomorphic and antiholomorphic degrees".into(),
            ));
        }
        Ok(Monomial { alpha, beta })
    }

    pub fn degree(&self) -> u32 {
        self.alpha.iter().flatten().sum()
    }

    pub fn is_modulus(&self) -> bool {
        self.alpha == self.beta
    }

    fn factor_value(alpha: &[u32], beta: &[u32], w: &[C64]) -> C64 {
        let n: f64 = w.iter().map(|x| x.norm_sqr()).sum();
        let d: u32 = alpha.iter().sum();
        let mut v = C64::new(1.0, 0.0);
        for i in 0..w.len() {
            v *= cpow(w[i], alpha[i]) * cpow(w[i].conj(), beta[i]);
        }
        v / n.powi(d as i32)
    }

    /// Value at a point given per-factor homogeneous lifts.
    pub fn value(&self, lifts: &[Vec<C64>]) -> C64 {
        self.alpha
            .iter()
            .zip(&self.beta)
            .zip(lifts)
            .map(|((a, b), w)| Self::factor_value(a, b, w))
            .product()
    }

    /// `dh / d wbar` in the chart coordinates of `charts` (1 at the chart
    /// index of every lift), concatenated over factors.
    pub fn dbar(&self, lifts: &[Vec<C64>], charts: &[usize]) -> Vec<C64> {
        let values: Vec<C64> = self
            .alpha
            .iter()
            .zip(&self.beta)
            .zip(lifts)
            .map(|((a, b), w)| Self::factor_value(a, b, w))
            .collect();
        let mut out = Vec::new();
        for (f, ((a, b), w)) in self.alpha.iter().zip(&self.beta).zip(lifts).enumerate() {
            let others: C64 = values
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .map(|(_, v)| *v)
                .product();
            let n: f64 = w.iter().map(|x| x.norm_sqr()).sum();
            let d: u32 = a.iter().sum();
            for i in (0..w.len()).filter(|i| *i != charts[f]) {
                let mut term = -values[f] * w[i] * (d as f64 / n);
                if b[i] > 0 {
                    let mut lowered = b.clone();
                    lowered[i] -= 1;
                    let mut v = C64::new(b[i] as f64, 0.0);
                    for j in 0..w.len() {
                        v *= cpow(w[j], a[j]) * cpow(w[j].conj(), lowered[j]);
                    }
                    term += v / n.powi(d as i32);
                }
                out.push(others * term);
            }
        }
        out
    }

    /// Average over the target against the normalized Fubini-Study volume:
    /// `alpha! m! / (d + m)!` per factor for modulus monomials, `0` otherwise.
    pub fn fubini_study_average(&self) -> f64 {
        if !self.is_modulus() {
            return 0.0;
        }
        self.alpha
            .iter()
            .map(|a| {
                let m = a.len() - 1;
                let d: u32 = a.iter().sum();
                let num: f64 = a.iter().map(|x| factorial(*x as usize)).product::<f64>() * factorial(m);
                num / factorial(d as usize + m)
            })
            .product()
    }

    fn label(&self) -> String {
        let part = |v: &Vec<Vec<u32>>| {
            v.iter()
                .map(|f| f.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(""))
                .collect::<Vec<_>>()
                .join("|")
        };
        format!("Z^{} Zbar^{}", part(&self.alpha), part(&self.beta))
    }
}

/// Scalar coefficient `psi` of a test form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Weight {
    One,
    /// A modulus monomial `|Z^c|^2 / |Z|^{2e}` (nonnegative).
    Modulus { monomial: Monomial },
    /// The real part of an arbitrary monomial (signed).
    RealPart { monomial: Monomial },
}

impl Weight {
    fn value(&self, lifts: &[Vec<C64>]) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Modulus { monomial } | Weight::RealPart { monomial } => monomial.value(lifts).re,
        }
    }

    fn average(&self) -> f64 {
        match self {
            Weight::One => 1.0,
            Weight::Modulus { monomial } | Weight::RealPart { monomial } => monomial.fubini_study_average(),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        !matches!(self, Weight::RealPart { .. })
    }

    fn label(&self) -> String {
        match self {
            Weight::One => "1".into(),
            Weight::Modulus { monomial } => format!("|{}|", monomial.label()),
            Weight::RealPart { monomial } => format!("Re({})", monomial.label()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// Bidegree `(k-1, k)`, paired with the boundary current.
    Boundary,
    /// Bidegree `(k, k)`, paired with the current itself.
    Bulk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestForm {
    pub kind: FormKind,
    /// Domain dimension `k` the bidegree refers to.
    pub k: usize,
    pub weight: Weight,
    /// `h` in `dbar h`; `None` for bulk forms and the zero form.
    pub potential: Option<Monomial>,
    /// Overall constant factor.
    pub scale: f64,
    /// Certified upper bound on the comass of the form including `scale`.
    pub norm_bound: f64,
    pub label: String,
}

/// Comass factor of `theta ^ psi omega^{k-1}` relative to `|theta| |psi|`.
fn boundary_comass_factor(k: usize) -> f64 {
    if k == 1 {
        1.0
    } else {
        2.0 * (2 * k - 1) as f64 * factorial(k - 1)
    }
}

/// `sqrt(theta^T G^{-1} conj(theta))`, the pointwise norm of `sum theta_b dwbar_b`.
fn covector_norm(target: &TargetManifoldSpec, p: &TargetPoint, theta: &[C64]) -> f64 {
    let g = target.metric_at_point(p);
    let Some(inv) = g.inverse() else {
        return f64::INFINITY;
    };
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..theta.len() {
        for b in 0..theta.len() {
            acc += theta[a] * inv[(a, b)] * theta[b].conj();
        }
    }
    acc.re.max(0.0).sqrt()
}

fn require_projective(target: &TargetManifoldSpec) -> Result<()> {
    if target.is_projective() {
        Ok(())
    } else {
        Err(Error::Catalog(format!(
            "no test-form dictionary for target {}",
            target.label()
        )))
    }
}

impl TestForm {
    pub fn zero(kind: FormKind, k: usize) -> Self {
        TestForm {
            kind,
            k,
            weight: Weight::One,
            potential: None,
            scale: 0.0,
            norm_bound: 0.0,
            label: "0".into(),
        }
    }

    /// `omega^k` itself (unnormalized, comass `k!`).
    pub fn omega_power(k: usize) -> Self {
        TestForm {
            kind: FormKind::Bulk,
            k,
            weight: Weight::One,
            potential: None,
            scale: 1.0,
            norm_bound: factorial(k),
            label: "omega^k".into(),
        }
    }

    /// `psi dbar h ^ omega^{k-1}` with a norm bound certified on the target.
    pub fn boundary(target: &TargetManifoldSpec, k: usize, potential: Monomial, weight: Weight, seed: u64) -> Result<Self> {
        require_projective(target)?;
        let mut form = TestForm {
            kind: FormKind::Boundary,
            k,
            label: format!("{} dbar({}) omega^{}", weight.label(), potential.label(), k - 1),
            weight,
            potential: Some(potential),
            scale: 1.0,
            norm_bound: 0.0,
        };
        form.norm_bound = form.certify(target, seed);
        Ok(form)
    }

    /// `psi omega^k` with a norm bound certified on the target.
    pub fn bulk(target: &TargetManifoldSpec, k: usize, weight: Weight, seed: u64) -> Result<Self> {
        require_projective(target)?;
        let mut form = TestForm {
            kind: FormKind::Bulk,
            k,
            label: format!("{} omega^{}", weight.label(), k),
            weight,
            potential: None,
            scale: 1.0,
            norm_bound: 0.0,
        };
        form.norm_bound = form.certify(target, seed);
        Ok(form)
    }

    /// Pointwise comass bound at a target point.
    pub fn pointwise_bound(&self, target: &TargetManifoldSpec, p: &TargetPoint) -> f64 {
        let lifts = target.homogeneous_lifts(p);
        let psi = self.weight.value(&lifts).abs() * self.scale.abs();
        match (self.kind, &self.potential) {
            (FormKind::Bulk, _) => psi * factorial(self.k),
            (FormKind::Boundary, None) => 0.0,
            (FormKind::Boundary, Some(h)) => {
                let theta = h.dbar(&lifts, &p.charts);
                psi * covector_norm(target, p, &theta) * boundary_comass_factor(self.k)
            }
        }
    }

    fn certify(&self, target: &TargetManifoldSpec, seed: u64) -> f64 {
        let mut rng = substream(seed, purpose::DICTIONARY, &[self.k as f64]);
        let points: Vec<TargetPoint> = (0..CERTIFICATION_SAMPLES)
            .map(|_| target.sample_point(&mut rng))
            .collect();
        let sup = points
            .par_iter()
            .map(|p| self.pointwise_bound(target, p))
            .reduce(|| 0.0, f64::max);
        sup * CERTIFICATION_MARGIN
    }

    /// The form divided by its norm bound (norm bound 1); zero forms are unchanged.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        if self.norm_bound > 0.0 {
            out.scale = self.scale / self.norm_bound;
            out.norm_bound = 1.0;
        }
        out
    }

    /// Pairing with the unique normalized current `[X] / vol(X)` when the
    /// target has dimension `k`.
    pub fn uniform_value(&self, target: &TargetManifoldSpec) -> Option<f64> {
        if self.kind != FormKind::Bulk || target.complex_dimension() != self.k || !target.is_projective() {
            return None;
        }
        Some(self.scale * self.weight.average())
    }

    fn bulk_density(&self, target: &TargetManifoldSpec, p: &TargetPoint, top: f64) -> f64 {
        if self.scale == 0.0 {
            return 0.0;
        }
        self.scale * self.weight.value(&target.homogeneous_lifts(p)) * top
    }

    fn boundary_density(&self, target: &TargetManifoldSpec, e: &EnrichedPoint) -> Result<C64> {
        let Some(h) = &self.potential else {
            return Ok(C64::new(0.0, 0.0));
        };
        if self.scale == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let lifts = target.homogeneous_lifts(&e.jet.point);
        let psi = self.weight.value(&lifts) * self.scale;
        if psi == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let theta = h.dbar(&lifts, &e.jet.point.charts);
        let j = &e.jet.jacobian;
        let k = j.ncols();
        // f^* dbar h = sum_c phi_c dzbar_c
        let phi: Vec<C64> = (0..k)
            .map(|c| (0..theta.len()).map(|b| theta[b] * j[(b, c)].conj()).sum())
            .collect();
        let b = CMatrix::from_fn(k, k, |a, c| C64::new(0.0, -2.0) * e.del_level[a] * phi[c]);
        Ok(mixed_wedge_coefficient(&e.metric, &b)? * psi)
    }
}

fn multi_indices(len: usize, degree: u32) -> Vec<Vec<u32>> {
    if len == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for mut rest in multi_indices(len - 1, degree - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Monomials with per-factor degrees summing to `1..=cap`, ordered by total
/// degree then lexicographically.
fn monomials(factors: &[usize], cap: u32, modulus_only: bool) -> Vec<Monomial> {
    let mut by_degree: Vec<Vec<Monomial>> = vec![Vec::new(); cap as usize + 1];
    fn rec(
        factors: &[usize],
        remaining: u32,
        total: u32,
        alpha: &mut Vec<Vec<u32>>,
        beta: &mut Vec<Vec<u32>>,
        modulus_only: bool,
        out: &mut Vec<Vec<Monomial>>,
    ) {
        let f = alpha.len();
        if f == factors.len() {
            if total > 0 {
                out[total as usize].push(Monomial {
                    alpha: alpha.clone(),
                    beta: beta.clone(),
                });
            }
            return;
        }
        for d in 0..=remaining {
            for a in multi_indices(factors[f] + 1, d) {
                let betas = if modulus_only {
                    vec![a.clone()]
                } else {
                    multi_indices(factors[f] + 1, d)
                };
                for b in betas {
                    alpha.push(a.clone());
                    beta.push(b);
                    rec(factors, remaining - d, total + d, alpha, beta, modulus_only, out);
                    alpha.pop();
                    beta.pop();
                }
            }
        }
    }
    rec(factors, cap, 0, &mut Vec::new(), &mut Vec::new(), modulus_only, &mut by_degree);
    by_degree.into_iter().flatten().collect()
}

fn weights(factors: &[usize], cap: u32) -> Vec<Weight> {
    std::iter::once(Weight::One)
        .chain(
            monomials(factors, cap, true)
                .into_iter()
                .map(|monomial| Weight::Modulus { monomial }),
        )
        .collect()
}

/// Normalized boundary forms `psi dbar h ^ omega^{k-1}`: weight `1` first,
/// then modulus weights; within a weight, potentials by degree.
pub fn boundary_dictionary(
    target: &TargetManifoldSpec,
    k: usize,
    degree_cap: u32,
    size: usize,
    seed: u64,
) -> Result<Vec<TestForm>> {
    require_projective(target)?;
    let factors = target.projective_factors();
    let potentials = monomials(factors, degree_cap, false);
    let mut out = Vec::new();
    'outer: for weight in weights(factors, degree_cap) {
        for h in &potentials {
            if out.len() >= size {
                break 'outer;
            }
            let form = TestForm::boundary(target, k, h.clone(), weight.clone(), seed)?;
            if form.norm_bound > 0.0 {
                out.push(form.normalized());
            }
        }
    }
    Ok(out)
}

/// Normalized bulk forms: `omega^k`, modulus weights, then real parts of
/// non-modulus monomials.
pub fn bulk_dictionary(
    target: &TargetManifoldSpec,
    k: usize,
    degree_cap: u32,
    size: usize,
    seed: u64,
) -> Result<Vec<TestForm>> {
    require_projective(target)?;
    let factors = target.projective_factors();
    let signed = monomials(factors, degree_cap, false)
        .into_iter()
        .filter(|m| !m.is_modulus())
        .map(|monomial| Weight::RealPart { monomial });
    weights(factors, degree_cap)
        .into_iter()
        .chain(signed)
        .take(size)
        .map(|w| TestForm::bulk(target, k, w, seed).map(|f| f.normalized()))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    UnitMass,
}

#[derive(Clone, Debug)]
struct EnrichedPoint {
    jet: MapJet,
    metric: CMatrix,
    top: f64,
    del_level: Vec<C64>,
}

/// A sample batch with the map's jet, pulled-back metric and the
/// filtration gradient at every point.
#[derive(Clone, Debug)]
pub struct EnrichedBatch {
    batch: SampleBatch,
    points: Vec<EnrichedPoint>,
}

impl EnrichedBatch {
    pub fn new(map: &HolomorphicMapSpec, filtration: &Filtration, batch: SampleBatch) -> Result<Self> {
        let points = (0..batch.len())
            .into_par_iter()
            .map(|i| {
                let z = batch.point(i);
                let jet = map.jet(z);
                let h = map.pullback_metric(&jet);
                let top = top_wedge_density(&h)?.value();
                Ok(EnrichedPoint {
                    jet,
                    metric: h.into_entries(),
                    top,
                    del_level: filtration.del_level(z),
                })
            })
            .collect::<Result<_>>()?;
        Ok(EnrichedBatch { batch, points })
    }

    pub fn batch(&self) -> &SampleBatch {
        &self.batch
    }

    fn volume(&self) -> Estimate {
        let top: Vec<f64> = self.points.iter().map(|p| p.top).collect();
        self.batch.estimate(&top)
    }

    fn complex_estimate(&self, values: &[C64]) -> ComplexEstimate {
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        ComplexEstimate {
            re: self.batch.estimate(&re),
            im: self.batch.estimate(&im),
        }
    }

    fn boundary_pairing(&self, target: &TargetManifoldSpec, form: &TestForm) -> Result<ComplexEstimate> {
        let values: Vec<C64> = self
            .points
            .par_iter()
            .map(|e| form.boundary_density(target, e))
            .collect::<Result<_>>()?;
        Ok(self.complex_estimate(&values))
    }
}

/// Weighted-sample representation of `f_*[V(r)]` and its boundary.
#[derive(Clone, Debug)]
pub struct CurrentApproximant {
    r: f64,
    k: usize,
    target: TargetManifoldSpec,
    normalization: Normalization,
    bulk: EnrichedBatch,
    level: EnrichedBatch,
    mass: Estimate,
}

impl CurrentApproximant {
    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Raw mass `t_k(r) = volume(f(V(r)))` estimated on the bulk batch.
    pub fn raw_mass(&self) -> Estimate {
        self.mass
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn target(&self) -> &TargetManifoldSpec {
        &self.target
    }

    pub fn bulk_batch(&self) -> &EnrichedBatch {
        &self.bulk
    }

    pub fn level_batch(&self) -> &EnrichedBatch {
        &self.level
    }

    /// Same current with the other normalization (batches are shared).
    pub fn with_normalization(&self, normalization: Normalization) -> Result<Self> {
        if normalization == Normalization::UnitMass {
            check_mass(self.mass)?;
        }
        let mut out = self.clone();
        out.normalization = normalization;
        Ok(out)
    }
}

fn check_mass(mass: Estimate) -> Result<()> {
    if mass.value <= 3.0 * mass.err || mass.value <= 0.0 {
        Err(Error::DegenerateNormalization {
            value: mass.value,
            err: mass.err,
        })
    } else {
        Ok(())
    }
}

/// Builds `f_*[V(r)]` along a filtration. Unit-mass normalization divides by
/// the bulk estimate of `t_k(r)` and fails when that is not significantly positive.
pub fn build_current_with(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    r: f64,
    n_samples: usize,
    seed: u64,
    normalization: Normalization,
    cfg: &SamplerConfig,
) -> Result<CurrentApproximant> {
    if map.domain_dimension() != filtration.dimension() {
        return Err(Error::DimensionMismatch(
            "map domain and exhaustion dimensions differ".into(),
        ));
    }
    let level = filtration.sample_level(r, n_samples, seed, cfg)?;
    let bulk = filtration.sample_bulk(r, n_samples, seed, cfg)?;
    let bulk = EnrichedBatch::new(map, filtration, bulk)?;
    let level = EnrichedBatch::new(map, filtration, level)?;
    let mass = bulk.volume();
    if normalization == Normalization::UnitMass {
        check_mass(mass)?;
    }
    Ok(CurrentApproximant {
        r,
        k: filtration.dimension(),
        target: map.target().clone(),
        normalization,
        bulk,
        level,
        mass,
    })
}

/// [`build_current_with`] on the sublevel filtration with the default sampler.
pub fn build_current(
    map: &HolomorphicMapSpec,
    exh: &ExhaustionSpec,
    r: f64,
    n_samples: usize,
    seed: u64,
    normalization: Normalization,
) -> Result<CurrentApproximant> {
    build_current_with(
        map,
        &Filtration::tau(exh.clone()),
        r,
        n_samples,
        seed,
        normalization,
        &SamplerConfig::default(),
    )
}

/// `<T, Phi>` for bulk forms, `<dT, Psi>` for boundary forms.
pub fn pair(current: &CurrentApproximant, form: &TestForm) -> Result<ComplexEstimate> {
    if form.k != current.k {
        return Err(Error::KindMismatch(format!(
            "form of dimension {} paired with a current of dimension {}",
            form.k, current.k
        )));
    }
    match form.kind {
        FormKind::Bulk => {
            let b = &current.bulk;
            let values: Vec<f64> = b
                .points
                .par_iter()
                .map(|e| form.bulk_density(&current.target, &e.jet.point, e.top))
                .collect();
            let raw = b.batch.estimate(&values);
            let re = match current.normalization {
                Normalization::Raw => raw,
                Normalization::UnitMass => {
                    // ratio of two sums over the same batch: delta-method error
                    let ratio = raw.value / current.mass.value;
                    let residual: Vec<f64> = values
                        .iter()
                        .zip(&b.points)
                        .map(|(v, e)| v - ratio * e.top)
                        .collect();
                    let err = b.batch.estimate(&residual).err / current.mass.value;
                    Estimate::new(ratio, err)
                }
            };
            Ok(ComplexEstimate {
                re,
                im: Estimate::ZERO,
            })
        }
        FormKind::Boundary => {
            let raw = current.level.boundary_pairing(&current.target, form)?;
            Ok(match current.normalization {
                Normalization::Raw => raw,
                Normalization::UnitMass => ComplexEstimate {
                    re: raw.re.over(current.mass),
                    im: raw.im.over(current.mass),
                },
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryMass {
    /// `max |<dT, Psi>|` over the dictionary: a lower bound for the mass of `dT`.
    pub value: Estimate,
    pub argmax: Option<usize>,
    pub dictionary_size: usize,
    pub empty_dictionary: bool,
}

/// Lower bound for `||d T||` from a normalized boundary dictionary.
pub fn boundary_mass(current: &CurrentApproximant, dictionary: &[TestForm]) -> Result<BoundaryMass> {
    if dictionary.is_empty() {
        return Ok(BoundaryMass {
            value: Estimate::ZERO,
            argmax: None,
            dictionary_size: 0,
            empty_dictionary: true,
        });
    }
    let mut best: Option<(usize, Estimate)> = None;
    for (i, form) in dictionary.iter().enumerate() {
        if form.kind != FormKind::Boundary {
            return Err(Error::KindMismatch(format!("entry {i} is not a boundary form")));
        }
        if form.norm_bound > 1.0 + 1e-12 {
            return Err(Error::KindMismatch(format!(
                "entry {i} has norm bound {} > 1",
                form.norm_bound
            )));
        }
        let m = pair(current, form)?.abs();
        if best.is_none_or(|(_, b)| m.value > b.value) {
            best = Some((i, m));
        }
    }
    let (i, value) = best.expect("nonempty dictionary");
    Ok(BoundaryMass {
        value,
        argmax: Some(i),
        dictionary_size: dictionary.len(),
        empty_dictionary: false,
    })
}

/// Raw boundary-mass lower bound at `r` from the level batch alone.
#[allow(clippy::too_many_arguments)]
pub fn level_boundary_mass(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    r: f64,
    dictionary: &[TestForm],
    n_samples: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<BoundaryMass> {
    let level = filtration.sample_level(r, n_samples, seed, cfg)?;
    let level = EnrichedBatch::new(map, filtration, level)?;
    let current = CurrentApproximant {
        r,
        k: filtration.dimension(),
        target: map.target().clone(),
        normalization: Normalization::Raw,
        bulk: EnrichedBatch {
            batch: level.batch.clone(),
            points: Vec::new(),
        },
        level,
        mass: Estimate::ZERO,
    };
    boundary_mass(&current, dictionary)
}

/// `(1/(r - r')) int_{V(r) \ V(r')} d sigma ^ f^* Psi` as a shell Monte Carlo sum.
#[allow(clippy::too_many_arguments)]
pub fn difference_quotient_pairing_with(
    map: &HolomorphicMapSpec,
    filtration: &Filtration,
    form: &TestForm,
    r_inner: f64,
    r: f64,
    n_samples: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<ComplexEstimate> {
    if form.kind != FormKind::Boundary || form.k != filtration.dimension() {
        return Err(Error::KindMismatch("difference quotients pair boundary forms".into()));
    }
    if !(r_inner < r && r_inner >= 0.0) {
        return Err(Error::InvalidGrid(format!("need 0 <= r' < r, got [{r_inner}, {r}]")));
    }
    for c in filtration.critical_levels() {
        if c > r_inner - cfg.exclusion_distance(r_inner) && c < r + cfg.exclusion_distance(r) {
            return Err(Error::CriticalValue {
                r,
                critical: c,
                distance: cfg.exclusion_distance(r),
            });
        }
    }
    let shell = filtration.sample_shell(r_inner, r, n_samples, seed, cfg)?;
    let enriched = EnrichedBatch::new(map, filtration, shell)?;
    Ok(enriched
        .boundary_pairing(map.target(), form)?
        .scale(1.0 / (r - r_inner)))
}

/// [`difference_quotient_pairing_with`] on the sublevel filtration.
#[allow(clippy::too_many_arguments)]
pub fn difference_quotient_pairing(
    map: &HolomorphicMapSpec,
    exh: &ExhaustionSpec,
    form: &TestForm,
    r_inner: f64,
    r: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ComplexEstimate> {
    difference_quotient_pairing_with(
        map,
        &Filtration::tau(exh.clone()),
        form,
        r_inner,
        r,
        n_samples,
        seed,
        &SamplerConfig::default(),
    )
}
