//! Error as a function of depth below the skin line.
//!
//! The skin line of a column is the first pixel, scanning down from the top,
//! whose reduced scattering exceeds a threshold. Depth bin `j` (depth `j·dz`)
//! collects the pixel `j` rows below it, for `j = 1 ..= ⌊max_depth / dz⌋`.

use super::metrics::relative_gain;
use super::sigma::SigmaParams;
use crate::error::{Error, Result};
use crate::grid::{FieldKind, GridSpec, OpticalImage, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthOptions {
    /// Reduced-scattering threshold of the skin line, cm⁻¹.
    pub skin_threshold: f64,
    /// Deepest bin, cm below the skin line.
    pub max_depth: f64,
}

impl Default for DepthOptions {
    fn default() -> Self {
        DepthOptions {
            skin_threshold: 10.0,
            max_depth: 2.3,
        }
    }
}

/// Mean per-pixel error in each depth bin.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthProfile {
    /// Bin depths below the skin line, cm.
    pub depths: Vec<f64>,
    /// NaN for bins that received no pixels.
    pub mean_error: Vec<f64>,
    pub counts: Vec<usize>,
    /// Columns without a skin crossing, summed over samples.
    pub excluded_columns: usize,
}

/// Row of the skin line in every column, `None` where μ_s′ never exceeds
/// the threshold.
pub fn skin_rows(optical: &OpticalImage, threshold: f64) -> Vec<Option<usize>> {
    let grid = optical.grid();
    let mus = optical.mu_s_prime();
    (0..grid.nx)
        .map(|ix| (0..grid.nz).find(|&iz| mus[grid.index(ix, iz)] > threshold))
        .collect()
}

/// Number of depth bins for a grid.
pub fn bin_count(grid: &GridSpec, max_depth: f64) -> usize {
    // The epsilon keeps 2.3 / 0.015 (= 153.33…) and exact multiples stable.
    (max_depth / grid.dz + 1e-9).floor() as usize
}

/// `|σ(truth) − σ(pred)|` per pixel.
pub fn scaled_abs_error(truth: &ScalarField, pred: &ScalarField, p: &SigmaParams) -> Result<ScalarField> {
    if truth.grid() != pred.grid() {
        return Err(Error::GridMismatch("truth", "prediction"));
    }
    let values = truth
        .values()
        .iter()
        .zip(pred.values())
        .map(|(&t, &q)| (p.apply(t) - p.apply(q)).abs())
        .collect();
    ScalarField::new(*truth.grid(), FieldKind::Auxiliary, values)
}

/// Averages per-pixel `errors[k]` over depth bins, using the skin line of
/// `optical[k]`. All samples must share one grid.
pub fn depth_profile(optical: &[&OpticalImage], errors: &[&ScalarField], opts: &DepthOptions) -> Result<DepthProfile> {
    if optical.len() != errors.len() {
        return Err(Error::ShapeMismatch {
            what: "error fields",
            expected: optical.len(),
            found: errors.len(),
        });
    }
    let Some(first) = optical.first() else {
        return Err(Error::UndefinedMetric("depth profile of an empty set"));
    };
    if !(opts.max_depth > 0.0 && opts.skin_threshold.is_finite()) {
        return Err(Error::InvalidConfig("depth profile needs max_depth > 0".into()));
    }
    let grid = *first.grid();
    let bins = bin_count(&grid, opts.max_depth);
    let mut sums = vec![0.0; bins];
    let mut counts = vec![0usize; bins];
    let mut excluded = 0;
    for (o, e) in optical.iter().zip(errors) {
        if *o.grid() != grid || *e.grid() != grid {
            return Err(Error::GridMismatch("depth profile sample", "first sample"));
        }
        for (ix, skin) in skin_rows(o, opts.skin_threshold).into_iter().enumerate() {
            let Some(skin) = skin else {
                excluded += 1;
                continue;
            };
            for j in 1..=bins {
                let iz = skin + j;
                if iz >= grid.nz {
                    break;
                }
                sums[j - 1] += e.values()[grid.index(ix, iz)];
                counts[j - 1] += 1;
            }
        }
    }
    Ok(DepthProfile {
        depths: (1..=bins).map(|j| j as f64 * grid.dz).collect(),
        mean_error: sums
            .iter()
            .zip(&counts)
            .map(|(&s, &n)| if n == 0 { f64::NAN } else { s / n as f64 })
            .collect(),
        counts,
        excluded_columns: excluded,
    })
}

/// Baseline and model depth profiles with the per-bin relative gain.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthComparison {
    pub depths: Vec<f64>,
    pub baseline: Vec<f64>,
    pub model: Vec<f64>,
    /// NaN where the gain is undefined (empty bin or zero baseline error).
    pub gain: Vec<f64>,
}

impl DepthComparison {
    pub fn new(baseline: &DepthProfile, model: &DepthProfile) -> Result<Self> {
        if baseline.depths != model.depths {
            return Err(Error::GridMismatch("baseline depth bins", "model depth bins"));
        }
        let gain = baseline
            .mean_error
            .iter()
            .zip(&model.mean_error)
            .map(|(&b, &m)| relative_gain(b, m).unwrap_or(f64::NAN))
            .collect();
        Ok(DepthComparison {
            depths: baseline.depths.clone(),
            baseline: baseline.mean_error.clone(),
            model: model.mean_error.clone(),
            gain,
        })
    }
}
