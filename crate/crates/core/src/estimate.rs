//! Monte Carlo estimates carrying a one-sigma standard error.

use serde::{Deserialize, Serialize};

/// A real estimate `value +- err` (one standard error).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Estimate {
    pub value: f64,
    pub err: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, err: 0.0 };

    pub fn new(value: f64, err: f64) -> Self {
        Estimate { value, err }
    }

    pub fn exact(value: f64) -> Self {
        Estimate { value, err: 0.0 }
    }

    pub fn scale(self, factor: f64) -> Self {
        Estimate::new(self.value * factor, self.err * factor.abs())
    }

    /// Difference of two independent estimates.
    pub fn minus(self, other: Estimate) -> Self {
        Estimate::new(self.value - other.value, self.err.hypot(other.err))
    }

    /// Product of two independent estimates, first-order error propagation.
    pub fn times(self, other: Estimate) -> Self {
        let value = self.value * other.value;
        let err = (self.err * other.value).hypot(self.value * other.err);
        Estimate::new(value, err)
    }

    /// Quotient of two independent estimates, first-order error propagation.
    pub fn over(self, other: Estimate) -> Self {
        let value = self.value / other.value;
        let err = (self.err / other.value).hypot(value * other.err / other.value);
        Estimate::new(value, err.abs())
    }

    /// True when `|self - other| <= nsigma * combined error + slack`.
    pub fn agrees_with(self, other: Estimate, nsigma: f64, slack: f64) -> bool {
        (self.value - other.value).abs() <= nsigma * self.err.hypot(other.err) + slack
    }

    /// Signed distance from `other` in units of the combined error.
    pub fn pull(self, other: Estimate) -> f64 {
        let sigma = self.err.hypot(other.err);
        if sigma == 0.0 {
            if self.value == other.value {
                0.0
            } else {
                f64::INFINITY.copysign(self.value - other.value)
            }
        } else {
            (self.value - other.value) / sigma
        }
    }
}

/// A complex estimate with independent errors on the real and imaginary parts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexEstimate {
    pub const ZERO: ComplexEstimate = ComplexEstimate {
        re: Estimate::ZERO,
        im: Estimate::ZERO,
    };

    pub fn scale(self, factor: f64) -> Self {
        ComplexEstimate {
            re: self.re.scale(factor),
            im: self.im.scale(factor),
        }
    }

    /// Modulus with first-order error propagation.
    pub fn abs(self) -> Estimate {
        let modulus = self.re.value.hypot(self.im.value);
        let err = if modulus > 0.0 {
            (self.re.value * self.re.err).hypot(self.im.value * self.im.err) / modulus
        } else {
            self.re.err.hypot(self.im.err)
        };
        Estimate::new(modulus, err)
    }

    /// Largest component error, used as a scalar error for complex comparisons.
    pub fn err(self) -> f64 {
        self.re.err.hypot(self.im.err)
    }

    pub fn minus(self, other: ComplexEstimate) -> Self {
        ComplexEstimate {
            re: self.re.minus(other.re),
            im: self.im.minus(other.im),
        }
    }

    pub fn value(self) -> crate::C64 {
        crate::C64::new(self.re.value, self.im.value)
    }
}

/// Weighted least-squares fit `y = a + b x`; returns `(a, b, err_b)`.
///
/// The slope error is the larger of the formal error implied by the
/// supplied sigmas and the residual-scatter error, so noisy inputs with
/// underestimated sigmas do not produce overconfident trends.
pub fn linear_fit(x: &[f64], y: &[f64], sigma: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n || sigma.len() != n {
        return None;
    }
    let largest = sigma.iter().cloned().fold(0.0_f64, f64::max);
    let w: Vec<f64> = if largest > 0.0 {
        let floor = largest * 1e-6;
        sigma.iter().map(|s| 1.0 / s.max(floor).powi(2)).collect()
    } else {
        vec![1.0; n]
    };
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let det = sw * sxx - sx * sx;
    if det <= 0.0 {
        return None;
    }
    let b = (sw * sxy - sx * sy) / det;
    let a = (sy - b * sx) / sw;
    let formal = (sw / det).sqrt();
    let scatter = if n > 2 {
        let chi2: f64 = (0..n).map(|i| w[i] * (y[i] - a - b * x[i]).powi(2)).sum();
        (chi2 / (n - 2) as f64 * sw / det).sqrt()
    } else {
        0.0
    };
    let all_zero_sigma = sigma.iter().all(|s| *s == 0.0);
    let err = if all_zero_sigma { scatter } else { formal.max(scatter) };
    Some((a, b, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_propagation() {
        let q = Estimate::new(6.0, 0.3).over(Estimate::new(2.0, 0.0));
        assert!((q.value - 3.0).abs() < 1e-15);
        assert!((q.err - 0.15).abs() < 1e-15);
    }

    #[test]
    fn fit_recovers_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (a, b, e) = linear_fit(&x, &y, &[0.0; 4]).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        assert!(e < 1e-10);
    }

    #[test]
    fn modulus_of_zero_keeps_error() {
        let z = ComplexEstimate {
            re: Estimate::new(0.0, 0.1),
            im: Estimate::new(0.0, 0.1),
        };
        assert!(z.abs().err > 0.0);
    }
}
