//! Sobolev loss terms on σ-scaled fields.
//!
//! Norms are plain Euclidean sums over pixels, never averaged, so the
//! relative weight α between the two terms does not depend on image size.

use serde::{Deserialize, Serialize};

use super::sigma::SigmaParams;
use crate::error::{Error, Result};
use crate::grid::{ScalarField, SobolevSample};

/// Scaling parameters for both loss terms and the Sobolev weight α.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    pub sigma_energy: SigmaParams,
    pub sigma_grad: SigmaParams,
    pub alpha: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            sigma_energy: SigmaParams::energy_default(),
            sigma_grad: SigmaParams::derivative_default(),
            alpha: 0.1,
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<()> {
        self.sigma_energy.validate()?;
        self.sigma_grad.validate()?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidConfig(format!("alpha must be >= 0, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// `‖σ(a) − σ(b)‖₂` over pixels.
pub fn scaled_distance(a: &ScalarField, b: &ScalarField, p: &SigmaParams) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch("truth", "prediction"));
    }
    let mut sum = 0.0;
    for (&x, &y) in a.values().iter().zip(b.values()) {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::NonFinite("loss input"));
        }
        let d = p.apply(x) - p.apply(y);
        sum += d * d;
    }
    Ok(sum.sqrt())
}

/// `‖σ(a)‖₂` over pixels.
pub fn scaled_norm(a: &ScalarField, p: &SigmaParams) -> f64 {
    a.values().iter().map(|&x| p.apply(x).powi(2)).sum::<f64>().sqrt()
}

/// Operator term `‖σ^E(E) − σ^E(Φ)‖₂`.
pub fn operator_loss(energy_true: &ScalarField, energy_pred: &ScalarField, p: &SigmaParams) -> Result<f64> {
    scaled_distance(energy_true, energy_pred, p)
}

/// Derivative term `‖σ^∇(∇_v E) − σ^∇(∇_v Φ)‖₂`, without α.
pub fn derivative_loss(jvp_true: &ScalarField, jvp_pred: &ScalarField, p: &SigmaParams) -> Result<f64> {
    scaled_distance(jvp_true, jvp_pred, p)
}

/// Loss of one (μ, v) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    pub total: f64,
    pub operator: f64,
    pub derivative: f64,
}

impl LossTerms {
    pub fn combine(operator: f64, derivative: f64, alpha: f64) -> Self {
        LossTerms {
            total: operator + alpha * derivative,
            operator,
            derivative,
        }
    }
}

/// `operator + α · derivative` for one sample.
pub fn sobolev_sample_loss(
    sample: &SobolevSample,
    energy_pred: &ScalarField,
    jvp_pred: &ScalarField,
    cfg: &LossConfig,
) -> Result<LossTerms> {
    cfg.validate()?;
    let operator = operator_loss(&sample.energy, energy_pred, &cfg.sigma_energy)?;
    let derivative = derivative_loss(&sample.energy_jvp, jvp_pred, &cfg.sigma_grad)?;
    Ok(LossTerms::combine(operator, derivative, cfg.alpha))
}
