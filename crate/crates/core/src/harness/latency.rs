use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::MeanStd;
use crate::dataio::SparseSegment;
use crate::model::{DenseBaselineModel, SetModel};
use crate::{Error, Result};

pub const WARMUP_RUNS: usize = 5;
pub const MIN_REPETITIONS: usize = 30;

/// Wall-time samples in milliseconds for each pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatencyReport {
    pub batch_size: usize,
    pub repetitions: usize,
    pub set_ms: Vec<f64>,
    pub baseline_ms: Vec<f64>,
    /// Interpolation share of each `baseline_ms` sample.
    pub interp_ms: Vec<f64>,
}

impl LatencyReport {
    pub fn set(&self) -> MeanStd {
        MeanStd::of(&self.set_ms)
    }

    pub fn baseline(&self) -> MeanStd {
        MeanStd::of(&self.baseline_ms)
    }

    pub fn interp(&self) -> MeanStd {
        MeanStd::of(&self.interp_ms)
    }
}

/// Times (a) direct set-model inference and (b) resample-then-baseline
/// inference on the same batch, after [`WARMUP_RUNS`] untimed runs of each.
pub fn latency_bench(
    model: &SetModel,
    baseline: &DenseBaselineModel,
    batch: &[SparseSegment],
    repetitions: usize,
) -> Result<LatencyReport> {
    if repetitions < MIN_REPETITIONS {
        return Err(Error::Config(format!(
            "need at least {MIN_REPETITIONS} repetitions, got {repetitions}"
        )));
    }
    if batch.is_empty() {
        return Err(Error::EmptyInput("latency batch".into()));
    }
    for _ in 0..WARMUP_RUNS {
        black_box(model.forward_batch(batch)?);
        black_box(baseline.forward_batch_timed(batch)?);
    }
    let mut report = LatencyReport {
        batch_size: batch.len(),
        repetitions,
        set_ms: Vec::with_capacity(repetitions),
        baseline_ms: Vec::with_capacity(repetitions),
        interp_ms: Vec::with_capacity(repetitions),
    };
    for _ in 0..repetitions {
        let t = Instant::now();
        black_box(model.forward_batch(batch)?);
        report.set_ms.push(t.elapsed().as_secs_f64() * 1e3);

        let t = Instant::now();
        let (out, stages) = baseline.forward_batch_timed(batch)?;
        black_box(out);
        report.baseline_ms.push(t.elapsed().as_secs_f64() * 1e3);
        report.interp_ms.push(stages.interpolation.as_secs_f64() * 1e3);
    }
    Ok(report)
}
