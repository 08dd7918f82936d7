//! Three-regime scaling function
//!
//! `σ_{a,c}(x) = sign(x) · log[(e^((|x|+c)/a) − 1) / (e^(c/a) − 1)]`
//!
//! which is linear for |x| ≪ c, logarithmic for c < |x| < a and linear again
//! (slope 1/a) for |x| ≫ a.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of σ: `a` sets the onset of the upper linear regime, `c` the
/// end of the lower one. Both are in the units of the scaled quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaParams {
    pub a: f64,
    pub c: f64,
}

/// Above this `|x|/a` the `log1p` form would overflow `e^(x/a)`.
const LARGE_ARGUMENT: f64 = 30.0;

impl SigmaParams {
    pub fn new(a: f64, c: f64) -> Result<Self> {
        let p = SigmaParams { a, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a.is_finite() && self.c.is_finite() && self.a > 0.0 && self.c > 0.0 && self.c < self.a) {
            return Err(Error::InvalidConfig(format!(
                "sigma parameters need 0 < c < a, got a={}, c={}",
                self.a, self.c
            )));
        }
        Ok(())
    }

    /// Operator-loss defaults: a = 10⁴, c = 1.
    pub fn energy_default() -> Self {
        SigmaParams { a: 1e4, c: 1.0 }
    }

    /// Derivative-loss defaults: a = 10⁴, c = 10.
    pub fn derivative_default() -> Self {
        SigmaParams { a: 1e4, c: 10.0 }
    }

    /// σ(x) for finite `x`.
    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        let t = x.abs() / self.a;
        let u = self.c / self.a;
        // e^((t+u)) − e^u = e^u (e^t − 1), so the ratio inside the log is
        // 1 + e^u·expm1(t)/expm1(u). This form is exact near x = 0.
        let magnitude = if t < LARGE_ARGUMENT {
            (u.exp() * t.exp_m1() / u.exp_m1()).ln_1p()
        } else {
            let s = t + u;
            s + (-(-s).exp()).ln_1p() - log_expm1(u)
        };
        if x < 0.0 {
            -magnitude
        } else {
            magnitude
        }
    }

    /// dσ/dx = 1 / (a (1 − e^(−(|x|+c)/a))), an even function of x.
    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let s = (x.abs() + self.c) / self.a;
        1.0 / (self.a * -(-s).exp_m1())
    }
}

fn log_expm1(u: f64) -> f64 {
    if u > 1.0 {
        u + (-(-u).exp()).ln_1p()
    } else {
        u.exp_m1().ln()
    }
}

/// σ(x), rejecting non-finite input.
pub fn sigma(x: f64, p: &SigmaParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("sigma input"));
    }
    Ok(p.apply(x))
}

/// dσ/dx, rejecting non-finite input.
pub fn sigma_derivative(x: f64, p: &SigmaParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::NonFinite("sigma input"));
    }
    Ok(p.derivative(x))
}

/// σ applied elementwise.
pub fn sigma_slice(values: &[f64], p: &SigmaParams) -> Result<Vec<f64>> {
    values.iter().map(|&x| sigma(x, p)).collect()
}

/// Display-only symmetric-log transform `asinh(x / c)`; not used by losses.
pub fn symmetric_log(x: f64, c: f64) -> f64 {
    (x / c).asinh()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_maps_to_zero() {
        for p in [SigmaParams::new(1.0, 0.01).unwrap(), SigmaParams::energy_default()] {
            assert_eq!(p.apply(0.0), 0.0);
            assert_eq!(p.apply(-0.0), 0.0);
        }
    }

    #[test]
    fn high_precision_values() {
        // 50-digit reference evaluations of the defining formula.
        let cases = [
            (1.0, 1.0, 0.01, 5.157_264_936_893_05),
            (5e4, 1e4, 1.0, 14.203_630_300_441_37),
            (1e-9, 1e4, 1.0, 1.000_050_000_333_333_4e-9),
            (123.456, 1e4, 10.0, 2.597_366_921_870_836),
            (1e6, 1e4, 1.0, 109.210_390_371_559_5),
            (3.0, 1.0, 0.1, 5.306_073_000_384_49),
        ];
        for (x, a, c, expected) in cases {
            let got = SigmaParams::new(a, c).unwrap().apply(x);
            assert!(((got - expected) / expected).abs() < 1e-13, "σ_{a},{c}({x}) = {got}, expected {expected}");
        }
    }

    #[test]
    fn derivative_limits() {
        let p = SigmaParams::new(1.0, 0.1).unwrap();
        let d = p.derivative(100.0);
        assert!((0.999..=1.0).contains(&d));
        let q = SigmaParams::energy_default();
        assert!((q.derivative(0.0) - 1.000_050_000_833_333_3).abs() < 1e-12);
    }

    #[test]
    fn rejects_invalid() {
        assert!(SigmaParams::new(1.0, 1.0).is_err());
        assert!(SigmaParams::new(1.0, 0.0).is_err());
        assert!(SigmaParams::new(-1.0, 0.5).is_err());
        assert!(sigma(f64::NAN, &SigmaParams::energy_default()).is_err());
        assert!(sigma_derivative(f64::INFINITY, &SigmaParams::energy_default()).is_err());
    }
}
