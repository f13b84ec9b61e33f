//! Synthetic sources, the three mixing pipelines, image ingestion and dataset
//! directories.

mod dataset;
pub mod images;
mod mixing;
mod sources;

pub use dataset::{
    default_replications, make_image_dataset, make_image_replication, make_synthetic,
    make_synthetic_with, sha256_hex, usable_images, Dataset, DatasetKind, DatasetMeta,
    MixingKind, NamedMatrix, Splits, SyntheticSpec, ValidationSource, DATASET_FORMAT_VERSION,
    IMAGE_DIMS, META_FILE, OBSERVATIONS_FILE, SOURCES_FILE, SPLITS_FILE,
    VALIDATION_OBSERVATIONS_FILE, VALIDATION_SOURCES_FILE,
};
pub use images::{procedural_corpus, GrayImage, IMAGE_HEIGHT, IMAGE_WIDTH};
pub use mixing::{mix_image, mix_linear, mix_nonlinear, poly_activation, sample_mixing_matrix};
pub use sources::{gen_sources, SourceShape, BANK_SIZE, SOURCE_NOISE};
