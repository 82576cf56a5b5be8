use super::types::{SensorStream, SparseSegment};
use crate::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct Segmentation {
    pub segments: Vec<SparseSegment>,
    /// Windows that contained no reading and were dropped.
    pub empty_windows: usize,
}

/// Slides a window of `window_len` seconds over the stream in steps of
/// `stride`, starting at the first timestamp.
///
/// Window `k` covers `[t₀ + k·stride, t₀ + k·stride + window_len)`. Its label
/// is the most frequent reading label, ties going to the lowest index.
pub fn segment(stream: &SensorStream, window_len: f64, stride: f64) -> Result<Segmentation> {
    if !(window_len > 0.0 && window_len.is_finite()) || !(stride > 0.0 && stride.is_finite()) {
        return Err(Error::Config(format!(
            "window length and stride must be positive (got {window_len}, {stride})"
        )));
    }
    let mut out = Segmentation::default();
    let Some(first) = stream.readings.first() else {
        return Ok(out);
    };
    let t0 = first.timestamp;
    let t_end = stream.readings.last().expect("nonempty").timestamp;
    let n_classes = stream.labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; n_classes];

    // readings are time-sorted, so the window contents are a contiguous run
    let mut lo = 0;
    let mut k: u64 = 0;
    loop {
        let start = t0 + k as f64 * stride;
        if start > t_end {
            break;
        }
        let end = start + window_len;
        while lo < stream.len() && stream.readings[lo].timestamp < start {
            lo += 1;
        }
        let mut hi = lo;
        while hi < stream.len() && stream.readings[hi].timestamp < end {
            hi += 1;
        }
        if hi == lo {
            out.empty_windows += 1;
        } else {
            counts.iter_mut().for_each(|c| *c = 0);
            for &l in &stream.labels[lo..hi] {
                counts[l] += 1;
            }
            out.segments.push(SparseSegment {
                readings: stream.readings[lo..hi].to_vec(),
                window_start: start,
                window_len,
                label: majority(&counts),
            });
        }
        k += 1;
    }
    Ok(out)
}

/// Index of the largest count; the lowest index wins ties.
pub fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
