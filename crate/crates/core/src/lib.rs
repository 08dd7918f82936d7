//! Differentiable Monte Carlo light transport for layered-tissue phantoms.
//!
//! The crate computes absorbed-energy fields together with their directional
//! derivatives with respect to per-pixel optical coefficients, synthesizes
//! tissue-mimicking and generic phantoms, and provides the scaling function,
//! Sobolev losses and evaluation metrics used to train and assess surrogate
//! models on the resulting data.

pub mod dataset;
pub mod error;
pub mod grid;
pub mod phantom;
pub mod scaling;
pub mod seed;
pub mod transport;

pub use dataset::{read_sample, write_sample, DatasetManifest, GenerationConfig};
pub use error::{Error, Result};
pub use grid::{
    depth_channel, direction_to_full_scattering, reduced_to_full_scattering, DirectionPair, FieldKind,
    GeneratorId, GridSpec, OpticalImage, ScalarField, SobolevSample,
};
pub use transport::{
    finite_difference_jvp, simulate, simulate_with_jvp, SimConfig, SourceKind, SourceSpec, TransportResult,
};
pub use phantom::{generate_phantom, make_dataset_sample, sample_direction, GeneratedSample, Phantom, TissueRanges};
pub use scaling::{LossConfig, SigmaParams};
