//! Recognition of activities of daily living (ADL) from smartphone
//! accelerometer captures.
//!
//! The pipeline runs capture ingest ([`ingest`]), magnitude + low-pass
//! cleaning and peak picking ([`dsp`]), fifteen peak/raw statistics
//! ([`features`]), column scaling ([`scaler`]), small dense networks trained
//! by plain SGD ([`nn`]) and the experiment grid that compares them
//! ([`experiment`]). [`synth`] produces labelled captures so the whole chain
//! can run without a recorded corpus.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the scalar to `f64`, which is what the file formats store.

pub mod dsp;
pub mod experiment;
pub mod features;
pub mod ingest;
pub mod nn;
pub mod rng;
pub mod scalar;
pub mod scaler;
pub mod stats;
pub mod synth;

pub use ingest::{AdlLabel, Capture, Sample};
pub use scalar::Real;

pub type ScalarSeries = dsp::ScalarSeries<f64>;
pub type PeakSet = dsp::PeakSet<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type ScalerParams = scaler::ScalerParams<f64>;
pub type NetworkSpec = nn::NetworkSpec<f64>;
pub type Model = nn::Model<f64>;
pub type Example = experiment::Example<f64>;

pub type ScalarSeries32 = dsp::ScalarSeries<f32>;
pub type FeatureVector32 = features::FeatureVector<f32>;
pub type Model32 = nn::Model<f32>;
