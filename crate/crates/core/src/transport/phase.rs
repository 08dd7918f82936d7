//! Henyey–Greenstein phase function.

use std::f64::consts::PI;

/// A sampled scattering deflection relative to the incoming direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deflection {
    pub cos_theta: f64,
    /// Azimuth in [0, 2π).
    pub azimuth: f64,
}

/// Below this |g| the sampler switches to the isotropic closed form.
const ISOTROPIC_EPS: f64 = 1e-6;

/// Samples a Henyey–Greenstein deflection from two uniform variates in [0, 1).
///
/// The polar inversion is increasing in `u.0`, so at `g = 0` it reduces to
/// `cos θ = 2u₀ − 1`.
#[inline]
pub fn sample_henyey_greenstein(g: f64, u: (f64, f64)) -> Deflection {
    let cos_theta = if g.abs() < ISOTROPIC_EPS {
        2.0 * u.0 - 1.0
    } else {
        let t = (1.0 - g * g) / (1.0 - g + 2.0 * g * u.0);
        ((1.0 + g * g - t * t) / (2.0 * g)).clamp(-1.0, 1.0)
    };
    Deflection {
        cos_theta,
        azimuth: 2.0 * PI * u.1,
    }
}

/// Henyey–Greenstein density of `cos θ` on [−1, 1] (integrates to 1).
pub fn henyey_greenstein_cos_density(g: f64, cos_theta: f64) -> f64 {
    let denom = 1.0 + g * g - 2.0 * g * cos_theta;
    0.5 * (1.0 - g * g) / (denom * denom.sqrt())
}

/// Rotates `dir` by a deflection, MCML convention. The result is renormalized.
#[inline]
pub(crate) fn deflect(dir: [f64; 3], d: Deflection) -> [f64; 3] {
    let [ux, uy, uz] = dir;
    let cos_t = d.cos_theta;
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let (sin_p, cos_p) = d.azimuth.sin_cos();
    let out = if uz.abs() > 0.999_99 {
        [sin_t * cos_p, sin_t * sin_p, cos_t * uz.signum()]
    } else {
        let temp = (1.0 - uz * uz).sqrt();
        [
            sin_t * (ux * uz * cos_p - uy * sin_p) / temp + ux * cos_t,
            sin_t * (uy * uz * cos_p + ux * sin_p) / temp + uy * cos_t,
            -sin_t * cos_p * temp + uz * cos_t,
        ]
    };
    let norm = (out[0] * out[0] + out[1] * out[1] + out[2] * out[2]).sqrt();
    [out[0] / norm, out[1] / norm, out[2] / norm]
}
