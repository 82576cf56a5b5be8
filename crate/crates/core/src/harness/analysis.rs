use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataio::SparseSegment;
use crate::model::{argmax, contributing_count, SetModel};
use crate::nncore::Matrix;
use crate::report::sig9;
use crate::Result;

/// Pooled embeddings as CSV: a `# z=<z> activities=a|b|c` line, a column
/// line, then one row per segment with the true and predicted activity.
pub fn embeddings_csv(model: &SetModel, segments: &[SparseSegment]) -> Result<String> {
    let names = model.activity_space().names();
    let z = model.z();
    let mut out = String::new();
    let _ = writeln!(out, "# z={z} activities={}", names.join("|"));
    out.push_str("segment,true_label,predicted_label");
    for j in 0..z {
        let _ = write!(out, ",e{j}");
    }
    out.push('\n');
    for (i, s) in segments.iter().enumerate() {
        let pooled = model.pool_segment(s)?;
        let pred = predict_from_pooled(model, &pooled.embedding)?;
        let _ = write!(out, "{i},{},{}", names[s.label], names[pred]);
        for v in &pooled.embedding {
            let _ = write!(out, ",{}", sig9(*v));
        }
        out.push('\n');
    }
    Ok(out)
}

fn predict_from_pooled(model: &SetModel, embedding: &[f64]) -> Result<usize> {
    let x = Matrix::from_vec(1, embedding.len(), embedding.to_vec())?;
    Ok(argmax(model.rho().forward(&x)?.row(0)))
}

/// Histogram of contributing-reading counts for one activity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityDensity {
    pub activity: String,
    pub segments: usize,
    /// `counts[k]` segments had exactly `k + 1` contributing readings.
    pub counts: Vec<usize>,
}

impl ActivityDensity {
    pub fn mean(&self) -> f64 {
        if self.segments == 0 {
            return 0.0;
        }
        let total: usize = self.counts.iter().enumerate().map(|(k, n)| (k + 1) * n).sum();
        total as f64 / self.segments as f64
    }
}

/// Per-activity histogram (by true label) over counts `1..=min(max m, z)`.
pub fn contributing_density(model: &SetModel, segments: &[SparseSegment]) -> Result<Vec<ActivityDensity>> {
    let max_m = segments.iter().map(SparseSegment::len).max().unwrap_or(1);
    let bins = max_m.min(model.z()).max(1);
    let mut out: Vec<ActivityDensity> = model
        .activity_space()
        .names()
        .iter()
        .map(|a| ActivityDensity {
            activity: a.clone(),
            segments: 0,
            counts: vec![0; bins],
        })
        .collect();
    for s in segments {
        let n = contributing_count(&model.pool_segment(s)?);
        let h = &mut out[s.label];
        h.segments += 1;
        h.counts[n - 1] += 1;
    }
    Ok(out)
}

/// Long-form CSV: `activity,count,segments,density`.
pub fn density_csv(hist: &[ActivityDensity]) -> String {
    let mut out = String::from("activity,count,segments,density\n");
    for h in hist {
        for (k, &n) in h.counts.iter().enumerate() {
            let density = if h.segments == 0 {
                0.0
            } else {
                n as f64 / h.segments as f64
            };
            let _ = writeln!(out, "{},{},{},{}", h.activity, k + 1, n, sig9(density));
        }
    }
    out
}
