//! Nonlinear independent component analysis with autoencoders trained on a
//! closed-form Cramer-Wold independence index, plus data generators, a linear
//! FastICA baseline and an evaluation harness.

pub mod autoencoder;
pub mod baselines;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod independence;
pub mod math;

pub use error::{Error, Result};
pub use math::{Matrix, Rng};
