//! Training, evaluation, sweeps, benchmarks and analysis exports.

mod analysis;
mod config;
pub mod csv;
mod cv;
mod latency;
mod metrics;
mod sweep;
mod train;

pub use analysis::{contributing_density, density_csv, embeddings_csv, ActivityDensity};
pub use config::TrainConfig;
pub use cv::{cross_validate, CvReport};
pub use latency::{latency_bench, LatencyReport, MIN_REPETITIONS, WARMUP_RUNS};
pub use metrics::{evaluate, ClassMetrics, Classifier, EvalReport, MeanStd};
pub use sweep::{
    sparsify_all, sparsify_seed, sparsity_sweep, window_sweep, GridRow, SweepResult, SweepRow,
    DEFAULT_DROP_RATES, DEFAULT_WINDOWS,
};
pub use train::{fit, train, train_baseline, ModelSpec, Trained};
