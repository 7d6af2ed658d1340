//! Chemometrics for FTIR absorbance spectra.
//!
//! Labelled spectra are loaded from CSV, optionally restricted to a
//! wavelength window, projected with LDA or PCA and classified with KNN or
//! an SVM. Pipelines are scored with stratified cross-validation on balanced
//! accuracy. Paired t-tests, backward feature elimination and window search
//! support band selection, and a generator produces synthetic spectra.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

pub mod bundle;
pub mod classifiers;
pub mod data;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod matrix;
pub mod numerics;
pub mod pipeline;
pub mod scalar;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

pub type Mat = Matrix<f64>;
pub type Dataset = SpectralDataset64;
pub type SpectralDataset64 = data::SpectralDataset<f64>;
pub type Axis = data::WavelengthAxis<f64>;
pub type Pipeline = pipeline::PipelineConfig<f64>;
pub type FittedModel = pipeline::FittedPipeline<f64>;
pub type LdaModel64 = features::LdaModel<f64>;
pub type PcaModel64 = features::PcaModel<f64>;
pub type KnnModel64 = classifiers::KnnModel<f64>;
pub type SvmModel64 = classifiers::SvmMulticlassModel<f64>;
