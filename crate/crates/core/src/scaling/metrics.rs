//! Normalized test-set errors and relative gains.

use super::loss::{scaled_distance, scaled_norm, LossConfig};
use crate::error::{Error, Result};
use crate::grid::{ScalarField, SobolevSample};

/// Surrogate output for one sample: predicted energy and its derivative
/// along the sample's direction. Values may have any sign.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub energy: ScalarField,
    pub energy_jvp: ScalarField,
}

/// Per-sample errors, each divided by the test-set mean of `‖σ(truth)‖₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedError {
    pub d_energy: f64,
    pub d_grad: f64,
}

/// Divides each residual norm by the mean of `reference_norms`.
///
/// The denominator is shared by the whole set, so changing any one
/// reference changes every output.
pub fn normalize_by_mean(residuals: &[f64], reference_norms: &[f64]) -> Result<Vec<f64>> {
    if residuals.is_empty() || reference_norms.is_empty() {
        return Err(Error::UndefinedMetric("empty test set"));
    }
    let mean = reference_norms.iter().sum::<f64>() / reference_norms.len() as f64;
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(Error::UndefinedMetric("zero normalization denominator"));
    }
    Ok(residuals.iter().map(|r| r / mean).collect())
}

/// `d_E` and `d_∇` for every sample of a test set.
pub fn normalized_errors(
    test_set: &[SobolevSample],
    predictions: &[Prediction],
    cfg: &LossConfig,
) -> Result<Vec<NormalizedError>> {
    cfg.validate()?;
    if test_set.len() != predictions.len() {
        return Err(Error::ShapeMismatch {
            what: "predictions",
            expected: test_set.len(),
            found: predictions.len(),
        });
    }
    let mut res_e = Vec::with_capacity(test_set.len());
    let mut res_g = Vec::with_capacity(test_set.len());
    let mut ref_e = Vec::with_capacity(test_set.len());
    let mut ref_g = Vec::with_capacity(test_set.len());
    for (s, p) in test_set.iter().zip(predictions) {
        res_e.push(scaled_distance(&s.energy, &p.energy, &cfg.sigma_energy)?);
        res_g.push(scaled_distance(&s.energy_jvp, &p.energy_jvp, &cfg.sigma_grad)?);
        ref_e.push(scaled_norm(&s.energy, &cfg.sigma_energy));
        ref_g.push(scaled_norm(&s.energy_jvp, &cfg.sigma_grad));
    }
    let d_e = normalize_by_mean(&res_e, &ref_e)?;
    let d_g = normalize_by_mean(&res_g, &ref_g)?;
    Ok(d_e
        .into_iter()
        .zip(d_g)
        .map(|(d_energy, d_grad)| NormalizedError { d_energy, d_grad })
        .collect())
}

/// `(d_baseline − d_model) / d_baseline`; undefined for a zero baseline.
pub fn relative_gain(d_baseline: f64, d_model: f64) -> Result<f64> {
    if !(d_baseline.is_finite() && d_model.is_finite()) {
        return Err(Error::NonFinite("relative gain input"));
    }
    if d_baseline <= 0.0 {
        return Err(Error::UndefinedMetric("relative gain with zero baseline error"));
    }
    Ok((d_baseline - d_model) / d_baseline)
}

/// Median of finite values; `None` if there are none.
pub fn median(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gain_examples() {
        assert_eq!(relative_gain(2.0, 1.0).unwrap(), 0.5);
        assert_eq!(relative_gain(0.3, 0.3).unwrap(), 0.0);
        assert_eq!(relative_gain(0.3, 0.0).unwrap(), 1.0);
        assert!(relative_gain(0.0, 0.1).is_err());
    }

    #[test]
    fn single_sample_ratio() {
        assert_eq!(normalize_by_mean(&[1.0], &[10.0]).unwrap(), vec![0.1]);
    }

    #[test]
    fn shared_denominator() {
        let a = normalize_by_mean(&[1.0, 1.0], &[2.0, 2.0]).unwrap();
        let b = normalize_by_mean(&[1.0, 1.0], &[2.0, 6.0]).unwrap();
        assert_eq!(a, vec![0.5, 0.5]);
        assert_eq!(b, vec![0.25, 0.25]);
    }

    #[test]
    fn undefined_cases() {
        assert!(normalize_by_mean(&[], &[]).is_err());
        assert!(normalize_by_mean(&[0.0], &[0.0]).is_err());
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[f64::NAN]), None);
    }
}
