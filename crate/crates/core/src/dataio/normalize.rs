use serde::{Deserialize, Serialize};

use super::types::{SensorReading, SensorStream, SparseSegment};
use crate::{Error, Result};

/// Per-channel min/max of the training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl NormStats {
    /// Min/max over an iterator of readings.
    pub fn fit<'a>(readings: impl IntoIterator<Item = &'a SensorReading>) -> Result<Self> {
        let mut it = readings.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::TrainingData("cannot fit normalizer on zero readings".into()))?;
        let mut min = first.channels.clone();
        let mut max = first.channels.clone();
        for r in it {
            if r.dim() != min.len() {
                return Err(Error::dim(format!(
                    "reading has {} channels, expected {}",
                    r.dim(),
                    min.len()
                )));
            }
            for (j, &v) in r.channels.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    pub fn fit_segments(segments: &[SparseSegment]) -> Result<Self> {
        Self::fit(segments.iter().flat_map(|s| &s.readings))
    }

    /// Identity-like stats for already normalized data.
    pub fn unit(d: usize) -> Self {
        Self {
            min: vec![0.0; d],
            max: vec![1.0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Channels whose training range collapsed to a single value.
    pub fn degenerate(&self) -> Vec<bool> {
        self.min.iter().zip(&self.max).map(|(a, b)| a == b).collect()
    }

    /// `(x − min)/(max − min)` clipped to `[0,1]`; degenerate channels map to 0.
    #[inline]
    pub fn scale_value(&self, channel: usize, x: f64) -> f64 {
        let (lo, hi) = (self.min[channel], self.max[channel]);
        if hi == lo {
            return 0.0;
        }
        ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn apply(&self, reading: &SensorReading) -> Result<SensorReading> {
        if reading.dim() != self.dim() {
            return Err(Error::dim(format!(
                "reading has {} channels, normalizer expects {}",
                reading.dim(),
                self.dim()
            )));
        }
        Ok(SensorReading {
            timestamp: reading.timestamp,
            channels: reading
                .channels
                .iter()
                .enumerate()
                .map(|(j, &x)| self.scale_value(j, x))
                .collect(),
        })
    }

    pub fn apply_segment(&self, segment: &SparseSegment) -> Result<SparseSegment> {
        Ok(SparseSegment {
            readings: segment
                .readings
                .iter()
                .map(|r| self.apply(r))
                .collect::<Result<_>>()?,
            ..segment.clone()
        })
    }
}

pub fn fit_normalizer(streams: &[SensorStream]) -> Result<NormStats> {
    NormStats::fit(streams.iter().flat_map(|s| &s.readings))
}

pub fn apply_normalizer(stats: &NormStats, reading: &SensorReading) -> Result<SensorReading> {
    stats.apply(reading)
}
