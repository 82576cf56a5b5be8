//! Sensor data handling: ingestion, normalization, windowing into sparse
//! segments, random sparsification, synthetic streams and stratified folds.

mod archive;
mod folds;
mod ingest;
mod normalize;
mod segment;
mod sparsify;
mod synth;
mod types;

pub use archive::SegmentArchive;
pub use folds::{stratified_folds, stratified_folds_from_labels, FoldPlan};
pub use ingest::{ingest_csv, CsvSchema, IngestStats, Ingested};
pub use normalize::{apply_normalizer, fit_normalizer, NormStats};
pub use segment::{majority, segment, Segmentation};
pub use sparsify::{drop_count, sparsify};
pub use synth::{synth_sparse_stream, synth_with_episodes, Episode, Oscillation, SynthConfig, SynthOutput};
pub use types::{ActivitySpace, SensorReading, SensorStream, SparseSegment};
