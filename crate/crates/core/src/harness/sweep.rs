use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::cv::cross_validate;
use super::metrics::{evaluate, Classifier, EvalReport, MeanStd};
use super::train::ModelSpec;
use crate::dataio::{segment, sparsify, ActivitySpace, SensorStream, SparseSegment};
use crate::model::{DenseBaselineModel, SetModel};
use crate::nncore::layer_seed;
use crate::{Error, Result};

pub const DEFAULT_DROP_RATES: [f64; 6] = [0.0, 0.1, 0.25, 0.5, 0.75, 0.9];
pub const DEFAULT_WINDOWS: [f64; 4] = [2.0, 4.0, 8.0, 16.0];

/// One grid point of a sparsification sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub drop_rate: f64,
    pub report: EvalReport,
    /// Mean wall time per inference batch of up to 128 segments.
    pub latency_ms: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, model: &str, drop_rate: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.drop_rate == drop_rate)
    }
}

/// Seed used to thin segment `index` at grid position `rate_index`.
pub fn sparsify_seed(seed: u64, rate_index: usize, index: usize) -> u64 {
    layer_seed(layer_seed(seed, rate_index), index)
}

/// Thinned copies of `segments`; originals are untouched.
pub fn sparsify_all(
    segments: &[SparseSegment],
    rate: f64,
    seed: u64,
    rate_index: usize,
) -> Result<Vec<SparseSegment>> {
    segments
        .iter()
        .enumerate()
        .map(|(i, s)| sparsify(s, rate, sparsify_seed(seed, rate_index, i)))
        .collect()
}

fn timed_eval<M: Classifier + ?Sized>(model: &M, segments: &[SparseSegment]) -> Result<(EvalReport, f64)> {
    let batches = segments.len().div_ceil(128).max(1);
    let t = Instant::now();
    let report = evaluate(model, segments)?;
    Ok((report, t.elapsed().as_secs_f64() * 1e3 / batches as f64))
}

/// Evaluates both models on thinned copies of `segments` at each drop rate.
/// Both models see the same thinned readings at each grid point.
pub fn sparsity_sweep(
    model: &SetModel,
    baseline: &DenseBaselineModel,
    segments: &[SparseSegment],
    drop_rates: &[f64],
    seed: u64,
) -> Result<SweepResult> {
    if drop_rates.is_empty() {
        return Err(Error::Config("empty drop-rate grid".into()));
    }
    for (i, r) in drop_rates.iter().enumerate() {
        if drop_rates[..i].contains(r) {
            return Err(Error::Config(format!("drop rate {r} listed twice")));
        }
    }
    let mut rows = Vec::with_capacity(2 * drop_rates.len());
    for (ri, &rate) in drop_rates.iter().enumerate() {
        let thinned = sparsify_all(segments, rate, seed, ri)?;
        let (report, latency_ms) = timed_eval(model, &thinned)?;
        rows.push(SweepRow {
            model: "set".into(),
            drop_rate: rate,
            report,
            latency_ms,
        });
        let (report, latency_ms) = timed_eval(baseline, &thinned)?;
        rows.push(SweepRow {
            model: format!("dense_{}", baseline.interp().name()),
            drop_rate: rate,
            report,
            latency_ms,
        });
    }
    Ok(SweepResult { seed, rows })
}

/// One (model, window length) cell of a window/interpolation grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridRow {
    pub model: String,
    pub window_len: f64,
    pub segments: usize,
    pub macro_precision: MeanStd,
    pub macro_recall: MeanStd,
    pub macro_f: MeanStd,
}

/// Re-segments `streams` at every window length and cross-validates every
/// model spec on the result. Stride follows the window length.
pub fn window_sweep(
    streams: &[SensorStream],
    space: &ActivitySpace,
    windows: &[f64],
    specs: &[ModelSpec],
    config: &TrainConfig,
    k: usize,
) -> Result<Vec<GridRow>> {
    let mut rows = Vec::new();
    for &w in windows {
        let mut segs = Vec::new();
        for s in streams {
            segs.extend(segment(s, w, w)?.segments);
        }
        let cfg = TrainConfig {
            window_len: w,
            stride: w,
            ..config.clone()
        };
        for spec in specs {
            let cv = cross_validate(&segs, space, k, &cfg, spec)?;
            rows.push(GridRow {
                model: spec.label(),
                window_len: w,
                segments: segs.len(),
                macro_precision: cv.macro_precision,
                macro_recall: cv.macro_recall,
                macro_f: cv.macro_f,
            });
        }
    }
    Ok(rows)
}
