//! Classification of temporally sparse sensor streams with set-based networks.
//!
//! Each time window of a stream is treated as an unordered set of readings.
//! A shared per-reading embedding network maps every reading into a latent
//! space, a feature-wise max pool collapses the set into a fixed-size segment
//! embedding, and a classifier head maps that embedding onto the activity
//! space. No interpolation onto a regular grid is required.
//!
//! The crate is organised as:
//!
//! - [`nncore`]: matrices, dense layers, manual backpropagation and RMSProp.
//! - [`dataio`]: ingestion, normalization, segmentation, sparsification,
//!   synthetic streams and stratified folds.
//! - [`interp`]: per-channel resampling of sparse segments onto regular grids,
//!   used by the interpolation baseline.
//! - [`model`]: the set model, the dense fixed-grid baseline and model files.
//! - [`harness`]: training, metrics, cross-validation, sweeps, latency and
//!   analysis exports.

pub mod dataio;
pub mod error;
pub mod harness;
pub mod interp;
pub mod model;
pub mod nncore;
pub mod report;

pub use error::{Error, Result};
