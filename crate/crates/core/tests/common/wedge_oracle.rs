//! Symbolic exterior algebra over the real coordinates `x1, y1, ..., xk, yk`.
//!
//! A form is a dense coefficient vector indexed by bitmasks of basis
//! one-forms; wedge signs come from counting inversions. Densities are read
//! off as the coefficient of `dx1 ^ dy1 ^ ... ^ dxk ^ dyk`.

use ahlfors::forms::CMatrix;
use ahlfors::C64;

#[derive(Clone, Debug)]
pub struct Form {
    coeffs: Vec<C64>,
}

impl Form {
    fn zero(k: usize) -> Self {
        Form {
            coeffs: vec![C64::new(0.0, 0.0); 1 << (2 * k)],
        }
    }

    fn one(k: usize) -> Self {
        let mut f = Form::zero(k);
        f.coeffs[0] = C64::new(1.0, 0.0);
        f
    }

    fn dz(k: usize, a: usize, conj: bool) -> Self {
        let mut f = Form::zero(k);
        f.coeffs[1 << (2 * a)] = C64::new(1.0, 0.0);
        f.coeffs[1 << (2 * a + 1)] = C64::new(0.0, if conj { -1.0 } else { 1.0 });
        f
    }

    pub fn wedge(&self, other: &Form) -> Form {
        let mut out = Form {
            coeffs: vec![C64::new(0.0, 0.0); self.coeffs.len()],
        };
        for (ma, ca) in self.coeffs.iter().enumerate() {
            if ca.norm_sqr() == 0.0 {
                continue;
            }
            for (mb, cb) in other.coeffs.iter().enumerate() {
                if mb & ma != 0 || cb.norm_sqr() == 0.0 {
                    continue;
                }
                // inversions: bits of `a` above each bit of `b`
                let mut swaps = 0;
                let mut rest = mb;
                while rest != 0 {
                    let j = rest.trailing_zeros();
                    swaps += (ma >> (j + 1)).count_ones();
                    rest &= rest - 1;
                }
                let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
                out.coeffs[ma | mb] += ca * cb * sign;
            }
        }
        out
    }

    fn add_scaled(&mut self, other: &Form, s: C64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b * s;
        }
    }

    pub fn volume_coefficient(&self) -> C64 {
        self.coeffs[self.coeffs.len() - 1]
    }
}

/// `(i/2) sum A_ab dz_a ^ dzbar_b`.
pub fn one_one_form(a: &CMatrix) -> Form {
    let k = a.nrows();
    let mut f = Form::zero(k);
    for p in 0..k {
        for q in 0..k {
            let term = Form::dz(k, p, false).wedge(&Form::dz(k, q, true));
            f.add_scaled(&term, C64::new(0.0, 0.5) * a[(p, q)]);
        }
    }
    f
}

fn power(f: &Form, k: usize, n: usize) -> Form {
    (0..n).fold(Form::one(k), |acc, _| acc.wedge(f))
}

/// Density of `alpha^k` against Euclidean volume.
pub fn top_density(a: &CMatrix) -> C64 {
    let k = a.nrows();
    power(&one_one_form(a), k, k).volume_coefficient()
}

/// Density of `beta_B ^ alpha^{k-1}` against Euclidean volume.
pub fn mixed_density(a: &CMatrix, b: &CMatrix) -> C64 {
    let k = a.nrows();
    power(&one_one_form(a), k, k - 1)
        .wedge(&one_one_form(b))
        .volume_coefficient()
}
