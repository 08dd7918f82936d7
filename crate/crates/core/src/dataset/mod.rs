//! On-disk formats: per-sample `.dlss` files, `.dlfd` field bundles and the
//! dataset manifest. Byte layouts are described in `docs/format.md`.

mod container;
mod fields;
mod generate;
mod manifest;
mod sample;

pub use container::ArrayEntry;
pub use fields::{decode_fields, encode_fields, read_fields, write_fields, FieldBundle, FIELDS_MAGIC, FIELDS_VERSION};
pub use generate::{generate_dataset, load_dataset, DatasetPlan, GenerationConfig, SplitPlan};
pub use manifest::{
    count_by_generator, sim_config_digest, DatasetManifest, ManifestEntry, MANIFEST_FILE, MANIFEST_VERSION,
    SAMPLE_EXTENSION,
};
pub use sample::{
    decode_sample, encode_sample, quantize_sample, read_sample, write_sample, SampleHeader, SAMPLE_ARRAYS,
    SAMPLE_MAGIC, SAMPLE_VERSION,
};
