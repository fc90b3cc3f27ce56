//! Linear algebra of (1,1)-forms on `C^k`.
//!
//! A (1,1)-form is stored through its coefficient matrix under the
//! convention `alpha = (i/2) sum_{a,b} A_ab dz_a ^ dzbar_b`. With this
//! normalization the standard Kaehler form `beta` has coefficient matrix
//! `I` and `beta^k = k! dV`, so every top-degree density below is measured
//! against the Euclidean volume element of `C^k = R^{2k}`.

use nalgebra::DMatrix;

use crate::{Error, Result, C64};

pub type CMatrix = DMatrix<C64>;

/// Relative tolerance for hermitian and positivity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Coefficient matrix of a real (1,1)-form; always square and hermitian.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    entries: CMatrix,
}

/// Density of a top-degree (k,k)-form against Euclidean volume.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct WedgeDensity(pub f64);

impl WedgeDensity {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl HermitianMatrix {
    /// Validates and symmetrizes `entries`.
    pub fn new(entries: CMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "coefficient matrix is {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let skew = (&entries - entries.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if skew > HERMITIAN_TOL * scale {
            return Err(Error::DimensionMismatch(format!(
                "matrix is not hermitian (max |A - A*| = {skew:.3e})"
            )));
        }
        Ok(Self::symmetrized(entries))
    }

    pub(crate) fn symmetrized(entries: CMatrix) -> Self {
        let adj = entries.adjoint();
        HermitianMatrix {
            entries: (entries + adj) * C64::new(0.5, 0.0),
        }
    }

    pub fn identity(k: usize) -> Self {
        HermitianMatrix {
            entries: CMatrix::identity(k, k),
        }
    }

    pub fn zeros(k: usize) -> Self {
        HermitianMatrix {
            entries: CMatrix::zeros(k, k),
        }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let k = values.len();
        let mut entries = CMatrix::zeros(k, k);
        for (i, v) in values.iter().enumerate() {
            entries[(i, i)] = C64::new(*v, 0.0);
        }
        HermitianMatrix { entries }
    }

    /// `scale * v v^*`, the coefficient matrix of `scale * (i/2) (v.dz) ^ conj(v.dz)`.
    pub fn rank_one(v: &[C64], scale: f64) -> Self {
        let k = v.len();
        let entries = CMatrix::from_fn(k, k, |a, b| v[a] * v[b].conj() * scale);
        HermitianMatrix { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn scaled(&self, factor: f64) -> Self {
        HermitianMatrix {
            entries: &self.entries * C64::new(factor, 0.0),
        }
    }

    pub fn add(&self, other: &HermitianMatrix) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(HermitianMatrix {
            entries: &self.entries + &other.entries,
        })
    }

    pub fn sub(&self, other: &HermitianMatrix) -> Result<Self> {
        check_same_dim(self.dim(), other.dim())?;
        Ok(HermitianMatrix {
            entries: &self.entries - &other.entries,
        })
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let k = self.dim();
        if k == 0 {
            return Vec::new();
        }
        if k == 1 {
            return vec![self.entries[(0, 0)].re];
        }
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| a.total_cmp(b));
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Positive semidefinite up to `tol` relative to the largest entry.
    pub fn is_psd(&self, tol: f64) -> bool {
        let scale = self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        self.min_eigenvalue() >= -tol * scale
    }

    /// Inverse, or `None` when singular.
    pub fn inverse(&self) -> Option<CMatrix> {
        self.entries.clone().try_inverse()
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "forms of dimension {a} and {b}"
        )));
    }
    Ok(())
}

/// Pointwise pullback of a hermitian form through a holomorphic Jacobian.
///
/// With `w = f(z)`, `dw_a = sum_c J_ac dz_c`, so the coefficient matrix of
/// `f^* alpha` is `J^T G conj(J)`. This is the conjugate-transpose sandwich
/// `J^* G J` written in the row/column order of the coefficient convention.
pub fn pullback(jacobian: &CMatrix, target_form: &HermitianMatrix) -> Result<HermitianMatrix> {
    if jacobian.nrows() != target_form.dim() {
        return Err(Error::DimensionMismatch(format!(
            "jacobian has {} rows but the target form has dimension {}",
            jacobian.nrows(),
            target_form.dim()
        )));
    }
    let h = jacobian.transpose() * target_form.entries() * jacobian.map(|z| z.conj());
    Ok(HermitianMatrix::symmetrized(h))
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Determinant; closed form for `k <= 3`, LU otherwise.
pub fn determinant(m: &CMatrix) -> C64 {
    match m.nrows() {
        0 => C64::new(1.0, 0.0),
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.clone().lu().determinant(),
    }
}

/// Adjugate by cofactors for `k <= 3`.
fn small_adjugate(m: &CMatrix) -> Option<CMatrix> {
    let k = m.nrows();
    match k {
        1 => Some(CMatrix::from_element(1, 1, C64::new(1.0, 0.0))),
        2 => Some(CMatrix::from_row_slice(
            2,
            2,
            &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]],
        )),
        3 => {
            let c = |r0: usize, r1: usize, c0: usize, c1: usize| {
                m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
            };
            // adj[i][j] = cofactor(j, i)
            Some(CMatrix::from_row_slice(
                3,
                3,
                &[
                    c(1, 2, 1, 2),
                    -c(0, 2, 1, 2),
                    c(0, 1, 1, 2),
                    -c(1, 2, 0, 2),
                    c(0, 2, 0, 2),
                    -c(0, 1, 0, 2),
                    c(1, 2, 0, 1),
                    -c(0, 2, 0, 1),
                    c(0, 1, 0, 1),
                ],
            ))
        }
        _ => None,
    }
}

/// Adjugate of a general square matrix. Uses cofactors for `k <= 3`, an LU
/// inverse scaled by the determinant when well conditioned, and `None`
/// when the matrix is too close to singular for the LU route.
pub fn adjugate(m: &CMatrix) -> Option<CMatrix> {
    if let Some(adj) = small_adjugate(m) {
        return Some(adj);
    }
    let lu = m.clone().lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..u.nrows()).map(|i| u[(i, i)].norm()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 || min / max < 1e-8 {
        return None;
    }
    let det = lu.determinant();
    lu.try_inverse().map(|inv| inv * det)
}

/// `d/dt det(A + tB)` at `t = 0`, from exact polynomial interpolation
/// through `k + 1` nodes (the determinant has degree `k` in `t`).
fn det_derivative_by_interpolation(a: &CMatrix, b: &CMatrix) -> C64 {
    let k = a.nrows();
    let scale_a = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let scale_b = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let step = if scale_b > 0.0 {
        (scale_a.max(scale_b) / scale_b).max(1e-12)
    } else {
        return C64::new(0.0, 0.0);
    };
    let nodes: Vec<f64> = (0..=k).map(|j| (j as f64 - k as f64 / 2.0) * step).collect();
    let values: Vec<C64> = nodes
        .iter()
        .map(|t| determinant(&(a + b * C64::new(*t, 0.0))))
        .collect();
    // derivative of the Lagrange interpolant at 0
    let mut total = C64::new(0.0, 0.0);
    for (j, tj) in nodes.iter().enumerate() {
        let denom: f64 = nodes
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != j)
            .map(|(_, tm)| tj - tm)
            .product();
        let mut deriv = 0.0;
        for m in (0..nodes.len()).filter(|m| *m != j) {
            deriv += nodes
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != j && *p != m)
                .map(|(_, tp)| -tp)
                .product::<f64>();
        }
        total += values[j] * (deriv / denom);
    }
    total
}

/// `(k-1)! tr(adj(A) B)`: the density of `B ^ A^{k-1}` for arbitrary complex `B`.
///
/// `B` need not be hermitian; the boundary pairing feeds the coefficient
/// matrix of `d tau ^ f^* theta` through this routine.
pub fn mixed_wedge_coefficient(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    let k = a.nrows();
    if !a.is_square() || b.nrows() != k || b.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "mixed wedge of {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if k == 0 {
        return Ok(C64::new(0.0, 0.0));
    }
    if k == 1 {
        return Ok(b[(0, 0)]);
    }
    let derivative = match adjugate(a) {
        Some(adj) => (adj * b).trace(),
        None => det_derivative_by_interpolation(a, b),
    };
    Ok(derivative * factorial(k - 1))
}

/// Density of `alpha^k` for `alpha` with coefficient matrix `A`: `k! det A`.
pub fn top_wedge_density(a: &HermitianMatrix) -> Result<WedgeDensity> {
    let k = a.dim();
    let det = determinant(a.entries()).re;
    let scale = a
        .entries()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        .powi(k as i32);
    if det < 0.0 {
        if det < -HERMITIAN_TOL * scale.max(1e-300) {
            return Err(Error::NumericalDegeneracy(format!(
                "negative determinant {det:.3e} for a form expected to be positive"
            )));
        }
        return Ok(WedgeDensity(0.0));
    }
    Ok(WedgeDensity(factorial(k) * det))
}

/// Density of `B ^ A^{k-1}`: `(k-1)! tr(adj(A) B)`.
pub fn mixed_wedge_density(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<WedgeDensity> {
    check_same_dim(a.dim(), b.dim())?;
    let value = mixed_wedge_coefficient(a.entries(), b.entries())?;
    Ok(WedgeDensity(value.re))
}

/// Smallest `K` with `i d|z|^2 ^ dbar|z|^2 <= K r^2 beta` on `B(0, r)`.
///
/// The coefficient matrix of `i d tau ^ dbar tau` for `tau = |z|^2` is
/// `2 zbar zbar^*`, whose top eigenvalue is `2|z|^2 <= 2 r^2`.
pub const RANK_ONE_DOMINATION: f64 = 2.0;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn identity_pullback() {
        let j = CMatrix::identity(1, 1);
        let h = pullback(&j, &HermitianMatrix::identity(1)).unwrap();
        assert_eq!(h.entries()[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn scalar_pullback() {
        let j = CMatrix::from_element(1, 1, c(2.0, -1.0));
        let h = pullback(&j, &HermitianMatrix::identity(1)).unwrap();
        assert!((h.entries()[(0, 0)].re - 5.0).abs() < 1e-15);
    }

    #[test]
    fn fubini_study_pullback_at_one() {
        // z -> [1:z] at z = 1: chart Jacobian 1, FS coefficient 1/(1+1)^2.
        let g = HermitianMatrix::diagonal(&[0.25]);
        let h = pullback(&CMatrix::identity(1, 1), &g).unwrap();
        assert!((h.entries()[(0, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn pullback_dimension_mismatch() {
        let j = CMatrix::identity(2, 1);
        assert!(matches!(
            pullback(&j, &HermitianMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn top_densities() {
        assert_eq!(top_wedge_density(&HermitianMatrix::identity(1)).unwrap().0, 1.0);
        assert_eq!(top_wedge_density(&HermitianMatrix::identity(2)).unwrap().0, 2.0);
        let d = top_wedge_density(&HermitianMatrix::diagonal(&[2.0, 3.0])).unwrap();
        assert!((d.0 - 12.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_densities() {
        let b = HermitianMatrix::diagonal(&[7.0]);
        let a = HermitianMatrix::diagonal(&[0.0]);
        assert_eq!(mixed_wedge_density(&a, &b).unwrap().0, 7.0);

        let i2 = HermitianMatrix::identity(2);
        assert!((mixed_wedge_density(&i2, &i2).unwrap().0 - 2.0).abs() < 1e-14);

        let a = HermitianMatrix::diagonal(&[2.0, 5.0]);
        let v = [c(0.3, 0.4), c(-1.0, 2.0)];
        let b = HermitianMatrix::rank_one(&v, 1.0);
        let expected = 5.0 * 0.25 + 2.0 * 5.0;
        assert!((mixed_wedge_density(&a, &b).unwrap().0 - expected).abs() < 1e-12);
    }

    #[test]
    fn negative_determinant_is_rejected() {
        let a = HermitianMatrix::diagonal(&[1.0, -1.0]);
        assert!(matches!(
            top_wedge_density(&a),
            Err(Error::NumericalDegeneracy(_))
        ));
    }

    #[test]
    fn degenerate_form_has_zero_density() {
        let a = HermitianMatrix::rank_one(&[c(1.0, 1.0), c(2.0, 0.0)], 1.0);
        let d = top_wedge_density(&a).unwrap().0;
        assert!(d.abs() < 1e-14);
    }

    #[test]
    fn interpolation_fallback_matches_adjugate() {
        let a = CMatrix::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2))
            + CMatrix::identity(4, 4) * c(2.0, 0.0);
        let b = CMatrix::from_fn(4, 4, |i, j| c(((i + 2 * j) % 5) as f64, 0.5 * i as f64));
        let via_adj = (adjugate(&a).unwrap() * &b).trace();
        let via_poly = det_derivative_by_interpolation(&a, &b);
        assert!((via_adj - via_poly).norm() < 1e-9 * via_adj.norm().max(1.0));
    }

    #[test]
    fn singular_matrix_uses_fallback() {
        let mut a = CMatrix::zeros(4, 4);
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(2.0, 0.0);
        a[(2, 2)] = c(3.0, 0.0);
        let b = CMatrix::identity(4, 4);
        // only the (3,3) cofactor survives: 1*2*3
        let value = mixed_wedge_coefficient(&a, &b).unwrap();
        assert!((value.re - 6.0 * 6.0).abs() < 1e-9, "{value}");
    }

    #[test]
    fn hermitian_check() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0)]);
        assert!(HermitianMatrix::new(m).is_err());
    }
}
