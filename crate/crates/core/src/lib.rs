//! B-cos networks with class-defining-feature nearest-neighbour classification.
//!
//! A B-cos encoder collapses, for each input, into a single matrix whose rows are
//! exact per-feature attributions. On top of it the crate builds a feature bank
//! over a reference set, ranks class-defining features by mutual information,
//! classifies by per-feature nearest-neighbour voting and pairs each vote with
//! the attribution maps that justify it.
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the CLI and the file formats use.

pub mod attrib;
pub mod bcos;
pub mod cdf;
pub mod comix;
pub mod data;
pub mod digest;
pub mod error;
pub mod evaluate;
mod io;
pub mod matrix;
pub mod metrics;
pub mod scalar;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::Scalar;

pub type Real = f64;
pub type Network = bcos::BcosNetwork<Real>;
pub type Layer = bcos::BcosLayer<Real>;
pub type LinearMap = bcos::DynamicLinearMap<Real>;
pub type Dataset = data::LabeledDataset<Real>;
pub type Bank = cdf::FeatureBank<Real>;
pub type CdfTable = cdf::CdfTable<Real>;
pub type Record = comix::PredictionRecord<Real>;
pub type Panel = comix::ExplanationPanel<Real>;
pub type AttributionMap = attrib::AttributionMap<Real>;
pub type Curve = metrics::CurveResult<Real>;
