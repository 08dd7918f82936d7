//! σ scaling, Sobolev losses and evaluation metrics.

mod depth;
mod loss;
mod metrics;
pub mod report;
mod sigma;

pub use depth::{bin_count, depth_profile, scaled_abs_error, skin_rows, DepthComparison, DepthOptions, DepthProfile};
pub use loss::{
    derivative_loss, operator_loss, scaled_distance, scaled_norm, sobolev_sample_loss, LossConfig, LossTerms,
};
pub use metrics::{median, normalize_by_mean, normalized_errors, relative_gain, NormalizedError, Prediction};
pub use sigma::{sigma, sigma_derivative, sigma_slice, symmetric_log, SigmaParams};
