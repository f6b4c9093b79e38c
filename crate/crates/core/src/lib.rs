//! Neural-regression toolkit for earthquake-catalog forecasting experiments.
//!
//! The crate covers the whole experiment pipeline:
//!
//! - [`catalog`] — parse, filter, and synthesize seismic event catalogs.
//! - [`features`] — encode events into normalized input/target vectors, fit
//!   min-max scalers, and segment samples into training/validation/production
//!   sets.
//! - [`network`] — layered feedforward networks mixing a Gaussian radial-basis
//!   layer with dense tanh/linear layers.
//! - [`trainer`] — full-batch backpropagation under momentum or Quickprop
//!   update rules, with overtraining-based early stopping and best-epoch
//!   weight restoration.
//! - [`metrics`] — MSE, NMSE, and range-normalized percent-error reports.
//! - [`harness`] — multi-model comparison runs, final-network training, and
//!   plot-data emission.
//!
//! All randomness is funneled through explicit `u64` seeds (see [`seed`]), so
//! every pipeline stage is reproducible bit for bit.

pub mod catalog;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod network;
pub mod seed;
pub mod trainer;

pub use catalog::{CatalogRecord, SynthRegion};
pub use features::{DatasetSplit, EncoderConfig, RawSample, Sample, ScalerParams, SplitRule};
pub use harness::{ComparisonConfig, ComparisonReport, FinalConfig, ModelKind};
pub use metrics::MetricsReport;
pub use network::{LayerKind, LayerSpec, Network, NetworkSpec};
pub use trainer::{StopReason, TrainingConfig, TrainingHistory, UpdateRule};
