//! Exhaustion functions on `C^k`, the filtrations they induce, and Monte
//! Carlo samplers for sublevel sets, shells and level sets.
//!
//! Seeds are split deterministically: every batch draws from a ChaCha8
//! stream seeded with the run seed, whose stream id is a splitmix64 hash of
//! the batch purpose (bulk, shell or level) and the bit patterns of the
//! radii that define the region. Any two computations asking for the same
//! region with the same seed therefore see bitwise identical samples, and
//! distinct radii get independent substreams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::estimate::Estimate;
use crate::forms::factorial;
use crate::{Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExhaustionName {
    /// `tau = |z|^2`.
    NormSquared {
        k: usize,
        #[serde(default)]
        r0: Option<f64>,
    },
    /// `tau = sum_i w_i |z_i|^2`.
    Ellipsoidal {
        k: usize,
        weights: Vec<f64>,
        #[serde(default)]
        r0: Option<f64>,
    },
    /// `tau = |z|^2 + A exp(-|z - c e_1|^2 / s^2)`.
    RadialPerturbation {
        k: usize,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default = "default_center")]
        center: f64,
        #[serde(default)]
        r0: Option<f64>,
    },
}

fn default_amplitude() -> f64 {
    4.0
}
fn default_width() -> f64 {
    0.5
}
fn default_center() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    NormSquared,
    Ellipsoidal(Vec<f64>),
    Bump { amplitude: f64, width: f64, center: f64 },
}

/// An exhaustion `tau` of `C^k` with its critical values and `r0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExhaustionSpec {
    name: ExhaustionName,
    k: usize,
    kind: Kind,
    critical_values: Vec<f64>,
    r0: f64,
}

pub fn catalog_exhaustion(name: &ExhaustionName) -> Result<ExhaustionSpec> {
    let check_k = |k: usize| {
        if k == 0 {
            Err(Error::Catalog("exhaustion dimension k must be >= 1".into()))
        } else {
            Ok(())
        }
    };
    let check_r0 = |r0: Option<f64>, default: f64| match r0 {
        Some(v) if !(v.is_finite() && v >= 0.0) => {
            Err(Error::Catalog(format!("r0 must be finite and >= 0, got {v}")))
        }
        Some(v) => Ok(v),
        None => Ok(default),
    };
    let (k, kind, critical_values, r0) = match name {
        ExhaustionName::NormSquared { k, r0 } => {
            check_k(*k)?;
            (*k, Kind::NormSquared, vec![0.0], check_r0(*r0, 0.0)?)
        }
        ExhaustionName::Ellipsoidal { k, weights, r0 } => {
            check_k(*k)?;
            if weights.len() != *k || weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(Error::Catalog(format!(
                    "ellipsoidal needs {k} positive weights, got {weights:?}"
                )));
            }
            (*k, Kind::Ellipsoidal(weights.clone()), vec![0.0], check_r0(*r0, 0.0)?)
        }
        ExhaustionName::RadialPerturbation {
            k,
            amplitude,
            width,
            center,
            r0,
        } => {
            check_k(*k)?;
            if !(amplitude.is_finite() && *amplitude >= 0.0)
                || !(width.is_finite() && *width > 0.0)
                || !(center.is_finite() && *center > 0.0)
            {
                return Err(Error::Catalog(
                    "radial_perturbation needs amplitude >= 0, width > 0, center > 0".into(),
                ));
            }
            let kind = Kind::Bump {
                amplitude: *amplitude,
                width: *width,
                center: *center,
            };
            let critical = bump_critical_values(*amplitude, *width, *center);
            (*k, kind, critical, check_r0(*r0, 1e-3)?)
        }
    };
    Ok(ExhaustionSpec {
        name: name.clone(),
        k,
        kind,
        critical_values,
        r0,
    })
}

/// Critical values of `|z|^2 + A exp(-|z - c e_1|^2 / s^2)`.
///
/// Off the real `z_1` axis the gradient cannot vanish (the `z_1` equation
/// reduces to `2c = 0`), so it suffices to find the roots of the profile
/// derivative along the real axis.
fn bump_critical_values(amplitude: f64, width: f64, center: f64) -> Vec<f64> {
    let s2 = width * width;
    let profile = |x: f64| x * x + amplitude * (-(x - center).powi(2) / s2).exp();
    let slope = |x: f64| 2.0 * x - 2.0 * amplitude * (x - center) / s2 * (-(x - center).powi(2) / s2).exp();
    let lo = -1.0;
    let hi = center + 8.0 * width + 1.0;
    let steps = 200_000;
    let h = (hi - lo) / steps as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut x0 = lo;
    let mut s0 = slope(x0);
    for i in 1..=steps {
        let x1 = lo + i as f64 * h;
        let s1 = slope(x1);
        if s0 == 0.0 {
            roots.push(x0);
        } else if s0 * s1 < 0.0 {
            let (mut a, mut b, mut sa) = (x0, x1, s0);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let sm = slope(mid);
                if sm == 0.0 || (b - a) < 1e-15 {
                    a = mid;
                    b = mid;
                    break;
                }
                if sa * sm < 0.0 {
                    b = mid;
                } else {
                    a = mid;
                    sa = sm;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        s0 = s1;
    }
    let mut values: Vec<f64> = roots.into_iter().map(profile).collect();
    values.sort_by(f64::total_cmp);
    values.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    values
}

impl ExhaustionSpec {
    pub fn name(&self) -> &ExhaustionName {
        &self.name
    }

    pub fn label(&self) -> String {
        match &self.name {
            ExhaustionName::NormSquared { k, .. } => format!("norm_squared({k})"),
            ExhaustionName::Ellipsoidal { k, weights, .. } => format!("ellipsoidal({k},{weights:?})"),
            ExhaustionName::RadialPerturbation {
                k,
                amplitude,
                width,
                center,
                ..
            } => format!("radial_perturbation({k},{amplitude},{width},{center})"),
        }
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn is_norm_squared(&self) -> bool {
        matches!(self.kind, Kind::NormSquared)
    }

    pub fn critical_values(&self) -> &[f64] {
        &self.critical_values
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn value(&self, z: &[C64]) -> f64 {
        let norm2: f64 = z.iter().map(|x| x.norm_sqr()).sum();
        match &self.kind {
            Kind::NormSquared => norm2,
            Kind::Ellipsoidal(w) => z.iter().zip(w).map(|(x, w)| w * x.norm_sqr()).sum(),
            Kind::Bump {
                amplitude,
                width,
                center,
            } => {
                let d2 = bump_distance2(z, *center);
                norm2 + amplitude * (-d2 / (width * width)).exp()
            }
        }
    }

    /// Coefficients of `d tau = sum_a (d tau / d z_a) dz_a`.
    pub fn del_tau(&self, z: &[C64]) -> Vec<C64> {
        match &self.kind {
            Kind::NormSquared => z.iter().map(|x| x.conj()).collect(),
            Kind::Ellipsoidal(w) => z.iter().zip(w).map(|(x, w)| x.conj() * *w).collect(),
            Kind::Bump {
                amplitude,
                width,
                center,
            } => {
                let s2 = width * width;
                let bump = amplitude * (-bump_distance2(z, *center) / s2).exp();
                z.iter()
                    .enumerate()
                    .map(|(a, x)| {
                        let shifted = if a == 0 { *x - *center } else { *x };
                        x.conj() - shifted.conj() * (bump / s2)
                    })
                    .collect()
            }
        }
    }

    /// Euclidean length of the real gradient, `2 |d tau|`.
    pub fn gradient_norm(&self, z: &[C64]) -> f64 {
        2.0 * self
            .del_tau(z)
            .iter()
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `R` with `V(r) = {tau < r}` contained in `B(0, R)`.
    pub fn bounding_radius(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match &self.kind {
            Kind::NormSquared | Kind::Bump { .. } => r.sqrt(),
            Kind::Ellipsoidal(w) => (r / w.iter().cloned().fold(f64::INFINITY, f64::min)).sqrt(),
        }
    }

    /// `R` with `B(0, R)` contained in `V(r)`.
    pub fn inner_radius(&self, r: f64) -> f64 {
        let r = r.max(0.0);
        match &self.kind {
            Kind::NormSquared => r.sqrt(),
            Kind::Ellipsoidal(w) => (r / w.iter().cloned().fold(0.0, f64::max)).sqrt(),
            Kind::Bump { amplitude, .. } => (r - amplitude).max(0.0).sqrt(),
        }
    }
}

fn bump_distance2(z: &[C64], center: f64) -> f64 {
    z.iter()
        .enumerate()
        .map(|(a, x)| {
            if a == 0 {
                (*x - center).norm_sqr()
            } else {
                x.norm_sqr()
            }
        })
        .sum()
}

/// Which family of domains exhausts `C^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationKind {
    /// `V(r) = {tau < r}`, radii in `tau` units.
    TauSublevel,
    /// `B(0, r)`, radii in Euclidean units; requires `tau = |z|^2`.
    EuclideanBall,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingScheme {
    /// Uniform proposals in a bounding ball or annulus, rejected outside the region.
    Rejection,
    /// Stratified radial sampling with antithetic pairs in each stratum (and
    /// rotated angular copies for `k = 1`); `norm_squared` only.
    Stratified,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub scheme: SamplingScheme,
    /// Independent replicate designs used for stratified error bars.
    pub replicates: usize,
    /// Level-set shell half-width is `max(shell_rel_width * r, shell_min_width)`.
    pub shell_rel_width: f64,
    pub shell_min_width: f64,
    /// Critical-value exclusion distance in units of the shell half-width.
    pub exclusion_factor: f64,
    pub min_acceptance: f64,
    /// Stratified `k = 1` designs place this many equally rotated copies at
    /// each radial node, so angular modes not divisible by it integrate exactly.
    pub angular_copies: usize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            scheme: SamplingScheme::Rejection,
            replicates: 16,
            shell_rel_width: 1e-3,
            shell_min_width: 1e-6,
            exclusion_factor: 10.0,
            min_acceptance: 1e-4,
            angular_copies: 8,
        }
    }
}

impl SamplerConfig {
    pub fn stratified() -> Self {
        SamplerConfig {
            scheme: SamplingScheme::Stratified,
            ..Default::default()
        }
    }

    pub fn shell_half_width(&self, r: f64) -> f64 {
        (self.shell_rel_width * r.abs()).max(self.shell_min_width)
    }

    pub fn exclusion_distance(&self, r: f64) -> f64 {
        self.exclusion_factor * self.shell_half_width(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionTag {
    Bulk { r: f64 },
    Shell { lo: f64, hi: f64 },
    Level { r: f64, half_width: f64 },
}

/// Weighted points with `E[sum_i w_i g(z_i)] = integral of g` over the region.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    k: usize,
    points: Vec<C64>,
    weights: Vec<f64>,
    region: RegionTag,
    seed: u64,
    proposals: usize,
    groups: usize,
    /// Relative floating-point error of the region volume; thin shells
    /// lose digits to cancellation in `r_out^2k - r_in^2k`.
    rounding: f64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.k
    }

    pub fn point(&self, i: usize) -> &[C64] {
        &self.points[i * self.k..(i + 1) * self.k]
    }

    pub fn points(&self) -> impl Iterator<Item = &[C64]> {
        self.points.chunks(self.k.max(1))
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn region(&self) -> RegionTag {
        self.region
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of proposals drawn (accepted or not).
    pub fn proposals(&self) -> usize {
        self.proposals
    }

    pub fn total_weight(&self) -> Estimate {
        self.estimate(&vec![1.0; self.len()])
    }

    /// Integral estimate of `g` from its values at the batch points.
    ///
    /// Rejection batches use the i.i.d. variance over all proposals
    /// (rejected ones contribute zero); stratified batches use the spread
    /// of their independent replicate designs. The volume rounding error is
    /// added in quadrature.
    pub fn estimate(&self, values: &[f64]) -> Estimate {
        let e = self.sampling_estimate(values);
        Estimate::new(e.value, e.err.hypot(e.value.abs() * self.rounding))
    }

    fn sampling_estimate(&self, values: &[f64]) -> Estimate {
        assert_eq!(values.len(), self.len(), "one value per batch point");
        if self.groups <= 1 {
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for (w, g) in self.weights.iter().zip(values) {
                let c = w * g;
                sum += c;
                sum2 += c * c;
            }
            let n = self.proposals.max(1) as f64;
            let var = (sum2 - sum * sum / n).max(0.0);
            Estimate::new(sum, var.sqrt())
        } else {
            let per = self.len() / self.groups;
            let sums: Vec<f64> = (0..self.groups)
                .map(|g| {
                    (g * per..(g + 1) * per)
                        .map(|i| self.weights[i] * values[i])
                        .sum::<f64>()
                })
                .collect();
            let total: f64 = sums.iter().sum();
            let mean = total / self.groups as f64;
            let ss: f64 = sums.iter().map(|s| (s - mean).powi(2)).sum();
            let g = self.groups as f64;
            Estimate::new(total, (g / (g - 1.0) * ss).sqrt())
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Purpose tags for [`substream`].
pub mod purpose {
    pub const BULK: u64 = 1;
    pub const SHELL: u64 = 2;
    pub const LEVEL: u64 = 3;
    pub const DICTIONARY: u64 = 4;
}

/// The substream for `(seed, purpose, key)`; see the module docs.
pub fn substream(seed: u64, purpose: u64, key: &[f64]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = splitmix64(purpose);
    for x in key {
        h = splitmix64(h ^ x.to_bits());
    }
    rng.set_stream(h);
    rng
}

fn unit_ball_volume(dim_real: usize) -> f64 {
    // 2k-dimensional unit ball: pi^k / k!
    let k = dim_real / 2;
    std::f64::consts::PI.powi(k as i32) / factorial(k)
}

fn random_direction<R: Rng>(rng: &mut R, k: usize, out: &mut [C64]) {
    loop {
        let mut norm2 = 0.0;
        for slot in out.iter_mut().take(k) {
            let z = C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            norm2 += z.norm_sqr();
            *slot = z;
        }
        if norm2 > 1e-300 {
            let inv = 1.0 / norm2.sqrt();
            for slot in out.iter_mut().take(k) {
                *slot *= inv;
            }
            return;
        }
    }
}

/// A filtration `r -> {sigma < r}` of `C^k` induced by an exhaustion.
#[derive(Clone, Debug, PartialEq)]
pub struct Filtration {
    exhaustion: ExhaustionSpec,
    kind: FiltrationKind,
}

impl Filtration {
    pub fn new(exhaustion: ExhaustionSpec, kind: FiltrationKind) -> Result<Self> {
        if kind == FiltrationKind::EuclideanBall && !exhaustion.is_norm_squared() {
            return Err(Error::Catalog(
                "the euclidean_ball filtration requires the norm_squared exhaustion".into(),
            ));
        }
        Ok(Filtration { exhaustion, kind })
    }

    pub fn tau(exhaustion: ExhaustionSpec) -> Self {
        Filtration {
            exhaustion,
            kind: FiltrationKind::TauSublevel,
        }
    }

    pub fn ball(k: usize) -> Result<Self> {
        let exh = catalog_exhaustion(&ExhaustionName::NormSquared { k, r0: None })?;
        Filtration::new(exh, FiltrationKind::EuclideanBall)
    }

    pub fn kind(&self) -> FiltrationKind {
        self.kind
    }

    pub fn exhaustion(&self) -> &ExhaustionSpec {
        &self.exhaustion
    }

    pub fn dimension(&self) -> usize {
        self.exhaustion.k
    }

    /// `sigma(z)`: `tau` or `|z|`.
    pub fn level(&self, z: &[C64]) -> f64 {
        let tau = self.exhaustion.value(z);
        match self.kind {
            FiltrationKind::TauSublevel => tau,
            FiltrationKind::EuclideanBall => tau.sqrt(),
        }
    }

    /// Coefficients of `d sigma`.
    pub fn del_level(&self, z: &[C64]) -> Vec<C64> {
        let d = self.exhaustion.del_tau(z);
        match self.kind {
            FiltrationKind::TauSublevel => d,
            FiltrationKind::EuclideanBall => {
                let rho = self.exhaustion.value(z).sqrt();
                if rho == 0.0 {
                    vec![C64::new(0.0, 0.0); d.len()]
                } else {
                    d.into_iter().map(|x| x / (2.0 * rho)).collect()
                }
            }
        }
    }

    fn to_level(&self, tau: f64) -> f64 {
        match self.kind {
            FiltrationKind::TauSublevel => tau,
            FiltrationKind::EuclideanBall => tau.max(0.0).sqrt(),
        }
    }

    fn to_tau(&self, s: f64) -> f64 {
        match self.kind {
            FiltrationKind::TauSublevel => s,
            FiltrationKind::EuclideanBall => s.max(0.0) * s.max(0.0),
        }
    }

    /// Critical values in filtration units.
    pub fn critical_levels(&self) -> Vec<f64> {
        self.exhaustion
            .critical_values
            .iter()
            .map(|c| self.to_level(*c))
            .collect()
    }

    pub fn r0_level(&self) -> f64 {
        self.to_level(self.exhaustion.r0)
    }

    /// Nearest critical level within the exclusion distance of `r`, if any.
    pub fn critical_near(&self, r: f64, cfg: &SamplerConfig) -> Option<f64> {
        let excl = cfg.exclusion_distance(r);
        self.critical_levels()
            .into_iter()
            .filter(|c| (r - c).abs() < excl)
            .min_by(|a, b| (r - a).abs().total_cmp(&(r - b).abs()))
    }

    pub fn is_flagged(&self, r: f64, cfg: &SamplerConfig) -> bool {
        self.critical_near(r, cfg).is_some()
    }

    fn outer_radius(&self, s: f64) -> f64 {
        self.exhaustion.bounding_radius(self.to_tau(s))
    }

    fn inner_radius(&self, s: f64) -> f64 {
        self.exhaustion.inner_radius(self.to_tau(s))
    }

    fn draw(
        &self,
        lo: f64,
        hi: f64,
        n: usize,
        mut rng: ChaCha8Rng,
        cfg: &SamplerConfig,
    ) -> Result<(Vec<C64>, usize, usize, f64, f64)> {
        let k = self.dimension();
        let dim_real = 2 * k;
        let r_in = if lo <= 0.0 { 0.0 } else { self.inner_radius(lo) };
        let r_out = self.outer_radius(hi);
        let u_lo = r_in.powi(dim_real as i32);
        let u_hi = r_out.powi(dim_real as i32);
        let volume = unit_ball_volume(dim_real) * (u_hi - u_lo);
        let rounding = (dim_real + 4) as f64 * f64::EPSILON * (u_hi + u_lo) / (u_hi - u_lo);
        let mut points = Vec::with_capacity(n * k);
        let mut dir = vec![C64::new(0.0, 0.0); k];
        match cfg.scheme {
            SamplingScheme::Rejection => {
                let mut accepted = 0usize;
                for _ in 0..n {
                    let u: f64 = rng.random();
                    let rho = (u_lo + u * (u_hi - u_lo)).powf(1.0 / dim_real as f64);
                    random_direction(&mut rng, k, &mut dir);
                    let start = points.len();
                    points.extend(dir.iter().map(|d| d * rho));
                    let s = self.level(&points[start..]);
                    if s >= lo && s < hi {
                        accepted += 1;
                    } else {
                        points.truncate(start);
                    }
                }
                if n > 0 && (accepted as f64) < cfg.min_acceptance * n as f64 {
                    return Err(Error::SamplerEfficiency {
                        rate: accepted as f64 / n as f64,
                        floor: cfg.min_acceptance,
                    });
                }
                Ok((points, n, 1, volume, rounding))
            }
            SamplingScheme::Stratified => {
                if !self.exhaustion.is_norm_squared() {
                    return Err(Error::Catalog(
                        "stratified sampling is only available for norm_squared".into(),
                    ));
                }
                let groups = cfg.replicates.max(1).min(n.max(1));
                let copies = if k == 1 { cfg.angular_copies.max(1) } else { 1 };
                // antithetic pairs of radial nodes in each stratum
                let strata = (n / (groups * copies * 2)).max(1);
                for _ in 0..groups {
                    for i in 0..strata {
                        let v: f64 = rng.random();
                        for w in [v, 1.0 - v] {
                            let u = (i as f64 + w) / strata as f64;
                            let rho = (u_lo + u * (u_hi - u_lo)).powf(1.0 / dim_real as f64);
                            if k == 1 {
                                let phi0 = std::f64::consts::TAU * rng.random::<f64>();
                                for j in 0..copies {
                                    let phi = phi0 + std::f64::consts::TAU * j as f64 / copies as f64;
                                    points.push(C64::from_polar(rho, phi));
                                }
                            } else {
                                random_direction(&mut rng, k, &mut dir);
                                points.extend(dir.iter().map(|d| d * rho));
                            }
                        }
                    }
                }
                let per = strata * 2 * copies;
                Ok((points, groups * per, groups, volume, rounding))
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn batch(
        &self,
        lo: f64,
        hi: f64,
        n: usize,
        seed: u64,
        purpose: u64,
        region: RegionTag,
        scale: f64,
        cfg: &SamplerConfig,
    ) -> Result<SampleBatch> {
        let rng = substream(seed, purpose, &[lo, hi]);
        let (points, proposals, groups, volume, rounding) = self.draw(lo, hi, n, rng, cfg)?;
        let k = self.dimension();
        let count = points.len() / k;
        let weight = volume / proposals.max(1) as f64 * scale;
        Ok(SampleBatch {
            k,
            points,
            weights: vec![weight; count],
            region,
            seed,
            proposals,
            groups,
            rounding,
        })
    }

    /// Points of `V(r) = {sigma < r}` with Euclidean volume weights.
    pub fn sample_bulk(&self, r: f64, n: usize, seed: u64, cfg: &SamplerConfig) -> Result<SampleBatch> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {r}")));
        }
        self.batch(0.0, r, n, seed, purpose::BULK, RegionTag::Bulk { r }, 1.0, cfg)
    }

    /// Points of `{lo <= sigma < hi}` with Euclidean volume weights.
    pub fn sample_shell(
        &self,
        lo: f64,
        hi: f64,
        n: usize,
        seed: u64,
        cfg: &SamplerConfig,
    ) -> Result<SampleBatch> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidGrid(format!("invalid shell [{lo}, {hi})")));
        }
        self.batch(lo, hi, n, seed, purpose::SHELL, RegionTag::Shell { lo, hi }, 1.0, cfg)
    }

    /// Thin-shell sample of the level set `{sigma = r}`.
    ///
    /// Weights are volume weights of the shell `[r - delta, r + delta)`
    /// divided by `2 delta`, so `sum w g` estimates
    /// `int_{sigma = r} g dS / |grad sigma|` (coarea formula). Fails within
    /// the exclusion distance of a critical level.
    pub fn sample_level(&self, r: f64, n: usize, seed: u64, cfg: &SamplerConfig) -> Result<SampleBatch> {
        if let Some(c) = self.critical_near(r, cfg) {
            return Err(Error::CriticalValue {
                r,
                critical: c,
                distance: cfg.exclusion_distance(r),
            });
        }
        let delta = cfg.shell_half_width(r);
        self.batch(
            r - delta,
            r + delta,
            n,
            seed,
            purpose::LEVEL,
            RegionTag::Level { r, half_width: delta },
            1.0 / (2.0 * delta),
            cfg,
        )
    }
}

/// Rejection sample of `V(r) = {tau < r}`.
pub fn sample_sublevel(spec: &ExhaustionSpec, r: f64, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    Filtration::tau(spec.clone()).sample_bulk(r, n_samples, seed, &SamplerConfig::default())
}

/// Thin-shell sample of `{tau = r}`.
pub fn sample_level(spec: &ExhaustionSpec, r: f64, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    Filtration::tau(spec.clone()).sample_level(r, n_samples, seed, &SamplerConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn norm_squared(k: usize) -> ExhaustionSpec {
        catalog_exhaustion(&ExhaustionName::NormSquared { k, r0: None }).unwrap()
    }

    #[test]
    fn catalog_values() {
        assert_eq!(norm_squared(1).value(&[c(3.0, 4.0)]), 25.0);
        let z = [c(1.0, 2.0), c(-0.5, 0.25)];
        assert_eq!(norm_squared(2).del_tau(&z), vec![c(1.0, -2.0), c(-0.5, -0.25)]);
        let e = catalog_exhaustion(&ExhaustionName::Ellipsoidal {
            k: 2,
            weights: vec![1.0, 2.0],
            r0: None,
        })
        .unwrap();
        assert_eq!(e.value(&[c(1.0, 0.0), c(1.0, 0.0)]), 3.0);
        assert_eq!(norm_squared(3).critical_values(), &[0.0]);
    }

    #[test]
    fn del_tau_matches_finite_differences() {
        let specs = [
            norm_squared(2),
            catalog_exhaustion(&ExhaustionName::Ellipsoidal {
                k: 2,
                weights: vec![0.5, 3.0],
                r0: None,
            })
            .unwrap(),
            catalog_exhaustion(&ExhaustionName::RadialPerturbation {
                k: 2,
                amplitude: 4.0,
                width: 0.5,
                center: 2.0,
                r0: None,
            })
            .unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for spec in &specs {
            for _ in 0..50 {
                let z: Vec<C64> = (0..2)
                    .map(|_| c(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5)))
                    .collect();
                let d = spec.del_tau(&z);
                let h = 1e-6;
                for a in 0..2 {
                    let shift = |dz: C64| {
                        let mut p = z.clone();
                        p[a] += dz;
                        spec.value(&p)
                    };
                    let dx = (shift(c(h, 0.0)) - shift(c(-h, 0.0))) / (2.0 * h);
                    let dy = (shift(c(0.0, h)) - shift(c(0.0, -h))) / (2.0 * h);
                    let fd = c(dx, -dy) * 0.5;
                    assert!((fd - d[a]).norm() <= 1e-6 * d[a].norm().max(1.0), "{fd} vs {}", d[a]);
                }
            }
        }
    }

    #[test]
    fn perturbation_has_isolated_critical_values() {
        let spec = catalog_exhaustion(&ExhaustionName::RadialPerturbation {
            k: 1,
            amplitude: 4.0,
            width: 0.5,
            center: 2.0,
            r0: None,
        })
        .unwrap();
        let cv = spec.critical_values();
        assert_eq!(cv.len(), 3, "{cv:?}");
        assert!(cv.windows(2).all(|w| w[1] > w[0]));
        assert!(cv[0] < spec.r0() && cv[1] > spec.r0());
    }

    #[test]
    fn proper_along_rays() {
        let spec = catalog_exhaustion(&ExhaustionName::RadialPerturbation {
            k: 1,
            amplitude: 4.0,
            width: 0.5,
            center: 2.0,
            r0: None,
        })
        .unwrap();
        for angle in [0.0, 1.0, 2.5, 4.0] {
            let dir = C64::from_polar(1.0, angle);
            let mut prev = spec.value(&[dir * 4.0]);
            for i in 5..60 {
                let v = spec.value(&[dir * i as f64]);
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn disc_area_rejection() {
        let b = sample_sublevel(&norm_squared(1), 4.0, 20_000, 7).unwrap();
        assert!(b.points().all(|z| z[0].norm_sqr() < 4.0));
        let area = b.total_weight();
        assert!(area.agrees_with(Estimate::exact(4.0 * PI), 3.0, 1e-9), "{area:?}");
    }

    #[test]
    fn four_ball_volume() {
        let f = Filtration::tau(norm_squared(2));
        let b = f.sample_bulk(1.0, 50_000, 3, &SamplerConfig::default()).unwrap();
        let v = b.total_weight();
        assert!(v.agrees_with(Estimate::exact(PI * PI / 2.0), 3.0, 1e-9), "{v:?}");
    }

    #[test]
    fn ellipsoid_volume_uses_rejection() {
        let e = catalog_exhaustion(&ExhaustionName::Ellipsoidal {
            k: 2,
            weights: vec![1.0, 4.0],
            r0: None,
        })
        .unwrap();
        let b = sample_sublevel(&e, 1.0, 100_000, 5).unwrap();
        assert!(b.len() < b.proposals());
        // volume of {|z1|^2 + 4|z2|^2 < 1} is (pi^2/2)/4
        let v = b.total_weight();
        assert!(v.agrees_with(Estimate::exact(PI * PI / 8.0), 3.0, 0.0), "{v:?}");
    }

    #[test]
    fn single_sample_batch() {
        let b = sample_sublevel(&norm_squared(2), 1.0, 1, 0).unwrap();
        assert!(b.len() <= 1);
        assert_eq!(b.region(), RegionTag::Bulk { r: 1.0 });
    }

    #[test]
    fn circle_length_from_level_batch() {
        let spec = norm_squared(1);
        let b = sample_level(&spec, 1.0, 40_000, 2).unwrap();
        let grads: Vec<f64> = b.points().map(|z| spec.gradient_norm(z)).collect();
        let length = b.estimate(&grads);
        assert!(length.agrees_with(Estimate::exact(2.0 * PI), 3.0, 1e-3 * 2.0 * PI), "{length:?}");
    }

    #[test]
    fn level_near_critical_value_is_refused() {
        let err = sample_level(&norm_squared(1), 5e-6, 10, 0).unwrap_err();
        assert!(matches!(err, Error::CriticalValue { .. }));
    }

    #[test]
    fn ellipsoidal_unit_weights_reproduce_norm_squared() {
        let e = catalog_exhaustion(&ExhaustionName::Ellipsoidal {
            k: 2,
            weights: vec![1.0, 1.0],
            r0: None,
        })
        .unwrap();
        let a = sample_level(&e, 1.0, 5_000, 9).unwrap();
        let b = sample_level(&norm_squared(2), 1.0, 5_000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batches_are_deterministic() {
        let spec = norm_squared(2);
        let a = sample_sublevel(&spec, 2.0, 1000, 42).unwrap();
        let b = sample_sublevel(&spec, 2.0, 1000, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_sublevel(&spec, 2.0, 1000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn stratified_disc_has_exact_area() {
        let f = Filtration::ball(1).unwrap();
        let b = f.sample_bulk(2.0, 1600, 1, &SamplerConfig::stratified()).unwrap();
        let area = b.total_weight();
        assert!((area.value - 4.0 * PI).abs() < 1e-12);
        assert!(area.err < 1e-12);
    }

    #[test]
    fn stratified_refuses_other_exhaustions() {
        let e = catalog_exhaustion(&ExhaustionName::Ellipsoidal {
            k: 1,
            weights: vec![2.0],
            r0: None,
        })
        .unwrap();
        let f = Filtration::tau(e);
        assert!(f.sample_bulk(1.0, 10, 0, &SamplerConfig::stratified()).is_err());
    }

    #[test]
    fn acceptance_floor() {
        let e = catalog_exhaustion(&ExhaustionName::Ellipsoidal {
            k: 3,
            weights: vec![1.0, 1e6, 1e6],
            r0: None,
        })
        .unwrap();
        let f = Filtration::tau(e);
        let err = f.sample_bulk(1.0, 20_000, 0, &SamplerConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SamplerEfficiency { .. }));
    }
}
