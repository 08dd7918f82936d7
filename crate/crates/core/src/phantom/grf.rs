//! Stationary Gaussian random fields by spectral synthesis.
//!
//! White noise on a grid padded to twice the target size is filtered in
//! Fourier space by the square root of a normalized power spectrum and
//! cropped back. With the spectrum normalized to unit mean the per-pixel
//! variance equals the target exactly in expectation.

use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{FieldKind, GridSpec, ScalarField};
use crate::seed;

/// Covariance model of a random field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrfSpec {
    /// Correlation length, cm.
    pub correlation_length: f64,
    /// Pointwise variance (dimensionless).
    pub variance: f64,
    /// High-frequency power-law slope β of the spectrum
    /// `(1 + (2πℓk)²)^(−β/2)`. Zero selects a squared-exponential
    /// spectrum `exp(−2π²ℓ²k²)` instead.
    pub spectral_exponent: f64,
}

impl GrfSpec {
    pub fn new(correlation_length: f64, variance: f64, spectral_exponent: f64) -> Result<Self> {
        let spec = GrfSpec {
            correlation_length,
            variance,
            spectral_exponent,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.correlation_length.is_finite() && self.correlation_length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "correlation length must be positive, got {}",
                self.correlation_length
            )));
        }
        if !(self.variance.is_finite() && self.variance >= 0.0) {
            return Err(Error::InvalidConfig(format!("variance must be >= 0, got {}", self.variance)));
        }
        if !(self.spectral_exponent.is_finite() && self.spectral_exponent >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "spectral exponent must be >= 0, got {}",
                self.spectral_exponent
            )));
        }
        Ok(())
    }

    fn power(&self, k2: f64) -> f64 {
        let l = self.correlation_length;
        let x = 4.0 * std::f64::consts::PI.powi(2) * l * l * k2;
        if self.spectral_exponent == 0.0 {
            (-0.5 * x).exp()
        } else {
            (1.0 + x).powf(-0.5 * self.spectral_exponent)
        }
    }
}

/// Draws a zero-mean stationary Gaussian field; deterministic per seed.
pub fn sample_grf(grid: &GridSpec, spec: &GrfSpec, seed: u64) -> Result<ScalarField> {
    grid.validate()?;
    spec.validate()?;
    if spec.variance == 0.0 {
        return Ok(ScalarField::zeros(*grid, FieldKind::Auxiliary));
    }
    let (mx, mz) = (2 * grid.nx, 2 * grid.nz);
    let mut rng = seed::rng(seed);
    let mut data: Vec<Complex<f64>> = (0..mx * mz)
        .map(|_| Complex::new(StandardNormal.sample(&mut rng), 0.0))
        .collect();

    let mut planner = FftPlanner::new();
    let (fx, fz) = (planner.plan_fft_forward(mx), planner.plan_fft_forward(mz));
    fft2(&mut data, mx, mz, &fx, &fz);

    let freq = |i: usize, m: usize, d: f64| {
        let i = if i <= m / 2 { i as f64 } else { i as f64 - m as f64 };
        i / (m as f64 * d)
    };
    let mut filter: Vec<f64> = Vec::with_capacity(mx * mz);
    for iz in 0..mz {
        let kz = freq(iz, mz, grid.dz);
        for ix in 0..mx {
            let kx = freq(ix, mx, grid.dx);
            filter.push(spec.power(kx * kx + kz * kz));
        }
    }
    let mean_power = filter.iter().sum::<f64>() / filter.len() as f64;
    // Unit-mean spectrum, the 1/N of the inverse transform, and the target
    // standard deviation folded into one amplitude per frequency.
    let scale = spec.variance.sqrt() / (mx * mz) as f64;
    for (c, p) in data.iter_mut().zip(&filter) {
        *c *= (p / mean_power).sqrt() * scale;
    }

    let (ix_inv, iz_inv) = (planner.plan_fft_inverse(mx), planner.plan_fft_inverse(mz));
    fft2(&mut data, mx, mz, &ix_inv, &iz_inv);

    let values = (0..grid.nz)
        .flat_map(|iz| {
            let row = &data[iz * mx..iz * mx + grid.nx];
            row.iter().map(|c| c.re)
        })
        .collect();
    ScalarField::new(*grid, FieldKind::Auxiliary, values)
}

fn fft2(data: &mut [Complex<f64>], mx: usize, mz: usize, fx: &Arc<dyn Fft<f64>>, fz: &Arc<dyn Fft<f64>>) {
    for row in data.chunks_exact_mut(mx) {
        fx.process(row);
    }
    let mut column = vec![Complex::new(0.0, 0.0); mz];
    for ix in 0..mx {
        for (iz, c) in column.iter_mut().enumerate() {
            *c = data[iz * mx + ix];
        }
        fz.process(&mut column);
        for (iz, c) in column.iter().enumerate() {
            data[iz * mx + ix] = *c;
        }
    }
}
