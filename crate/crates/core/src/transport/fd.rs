//! Central finite differences of the energy field, used to check the
//! score-based derivative.

use super::{simulate, SimConfig};
use crate::error::{Error, Result};
use crate::grid::{DirectionPair, FieldKind, OpticalImage, ScalarField};

/// Largest ε for which `μ ± ε·v` keeps both coefficient fields nonnegative.
/// Infinite for a zero direction.
pub fn max_stable_epsilon(optical: &OpticalImage, direction: &DirectionPair) -> f64 {
    let bound = |mu: &[f64], v: &[f64]| {
        mu.iter()
            .zip(v)
            .filter(|(_, v)| **v != 0.0)
            .map(|(m, v)| m / v.abs())
            .fold(f64::INFINITY, f64::min)
    };
    bound(optical.mu_a(), direction.v_a()).min(bound(optical.mu_s_prime(), direction.v_s_prime()))
}

/// `[E(μ + εv) − E(μ − εv)] / 2ε` with both runs sharing `config.seed`.
pub fn finite_difference_jvp(
    optical: &OpticalImage,
    direction: &DirectionPair,
    config: &SimConfig,
    epsilon: f64,
) -> Result<ScalarField> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    let limit = max_stable_epsilon(optical, direction);
    if epsilon > limit {
        return Err(Error::InvalidConfig(format!(
            "epsilon {epsilon} drives a coefficient negative (largest admissible {limit:.6e})"
        )));
    }
    let plus = simulate(&optical.perturbed(direction, epsilon)?, config)?;
    let minus = simulate(&optical.perturbed(direction, -epsilon)?, config)?;
    let values = plus
        .energy
        .values()
        .iter()
        .zip(minus.energy.values())
        .map(|(p, m)| (p - m) / (2.0 * epsilon))
        .collect();
    ScalarField::new(*optical.grid(), FieldKind::Derivative, values)
}

/// Rescales `direction` pixelwise to `μ ⊙ v / max|v|` for each coefficient,
/// so that every ε in (0, 1) keeps `μ ± εv` nonnegative.
///
/// Generator directions are drawn independently of the phantom and may put
/// a large component on a near-zero coefficient, which forces a tiny
/// admissible ε. Central differences that share random numbers become very
/// noisy as ε → 0, so the finite-difference check uses this relative form.
pub fn coefficient_relative_direction(optical: &OpticalImage, direction: &DirectionPair) -> Result<DirectionPair> {
    if direction.grid() != optical.grid() {
        return Err(Error::GridMismatch("optical image", "direction"));
    }
    let scale = |mu: &[f64], v: &[f64]| {
        let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        mu.iter()
            .zip(v)
            .map(|(a, b)| if m > 0.0 { a * b / m } else { 0.0 })
            .collect()
    };
    DirectionPair::new(
        *optical.grid(),
        scale(optical.mu_a(), direction.v_a()),
        scale(optical.mu_s_prime(), direction.v_s_prime()),
    )
}

/// `‖estimate − reference‖₂ / ‖reference‖₂` over pixels where
/// `|reference| ≥ threshold · max|reference|`. Returns 0 when the reference
/// vanishes identically and the estimate does too.
pub fn masked_relative_l2(estimate: &ScalarField, reference: &ScalarField, threshold: f64) -> Result<f64> {
    if estimate.grid() != reference.grid() {
        return Err(Error::GridMismatch("estimate", "reference"));
    }
    let cut = threshold * reference.max_abs();
    let (mut num, mut den) = (0.0, 0.0);
    for (e, r) in estimate.values().iter().zip(reference.values()) {
        if r.abs() >= cut {
            num += (e - r).powi(2);
            den += r * r;
        }
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}
