use std::time::{Duration, Instant};

use crate::dataio::{ActivitySpace, NormStats, SparseSegment};
use crate::interp::{grid_len, resample, DenseSegment, InterpKind};
use crate::nncore::{layer_seed, Activation, Matrix, Mlp};
use crate::{Error, Result};

use super::set_model::argmax;

/// Fixed-grid classifier: resample each segment, flatten the grid row-major
/// and feed an MLP.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBaselineModel {
    pub(crate) mlp: Mlp,
    pub(crate) interp: InterpKind,
    pub(crate) target_rate: f64,
    pub(crate) window_len: f64,
    pub(crate) space: ActivitySpace,
    pub(crate) norm: NormStats,
}

/// Time spent in each stage of a baseline batch.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimes {
    pub interpolation: Duration,
    pub network: Duration,
}

impl DenseBaselineModel {
    /// `hidden` lists hidden widths; input is `round(f·δt)·d`, output one
    /// softmax unit per activity.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        d: usize,
        hidden: &[usize],
        interp: InterpKind,
        target_rate: f64,
        window_len: f64,
        space: ActivitySpace,
        norm: NormStats,
        seed: u64,
    ) -> Result<Self> {
        if hidden.iter().any(|&w| w == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        if !(target_rate > 0.0 && window_len > 0.0) {
            return Err(Error::Config(
                "target rate and window length must be positive".into(),
            ));
        }
        if norm.dim() != d {
            return Err(Error::dim("normalizer width does not match channel count"));
        }
        let input = grid_len(target_rate, window_len) * d;
        let dims: Vec<usize> = std::iter::once(input)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(space.len()))
            .collect();
        let mlp = Mlp::with_widths(&dims, Activation::Softmax, layer_seed(seed, 300))?;
        Self::from_parts(mlp, interp, target_rate, window_len, space, norm)
    }

    pub fn from_parts(
        mlp: Mlp,
        interp: InterpKind,
        target_rate: f64,
        window_len: f64,
        space: ActivitySpace,
        norm: NormStats,
    ) -> Result<Self> {
        let expected = grid_len(target_rate, window_len) * norm.dim();
        if mlp.input_width() != expected {
            return Err(Error::dim(format!(
                "baseline input width {} but grid needs {expected}",
                mlp.input_width()
            )));
        }
        if mlp.output_width() != space.len() || mlp.output_activation() != Activation::Softmax {
            return Err(Error::dim(
                "baseline must end in a softmax over the activity space",
            ));
        }
        Ok(Self {
            mlp,
            interp,
            target_rate,
            window_len,
            space,
            norm,
        })
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn interp(&self) -> InterpKind {
        self.interp
    }

    pub fn target_rate(&self) -> f64 {
        self.target_rate
    }

    pub fn window_len(&self) -> f64 {
        self.window_len
    }

    pub fn activity_space(&self) -> &ActivitySpace {
        &self.space
    }

    pub fn norm(&self) -> &NormStats {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.norm.dim()
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        let w = self.mlp.widths();
        w[1..w.len() - 1].to_vec()
    }

    /// Normalizes and resamples one segment onto the model's grid.
    pub fn resample(&self, segment: &SparseSegment) -> Result<DenseSegment> {
        if (segment.window_len - self.window_len).abs() > 1e-9 * self.window_len {
            return Err(Error::dim(format!(
                "segment window {} s does not match baseline window {} s",
                segment.window_len, self.window_len
            )));
        }
        let normalized = self.norm.apply_segment(segment)?;
        resample(&normalized, self.interp, self.target_rate)
    }

    /// Flattened (n × m·d) design matrix for already resampled segments.
    pub fn design_matrix(&self, dense: &[DenseSegment]) -> Result<Matrix> {
        let width = self.mlp.input_width();
        let mut data = Vec::with_capacity(dense.len() * width);
        for d in dense {
            if d.values.as_slice().len() != width {
                return Err(Error::dim("resampled grid does not match baseline input"));
            }
            data.extend_from_slice(d.values.as_slice());
        }
        Matrix::from_vec(dense.len(), width, data)
    }

    pub fn forward(&self, segment: &SparseSegment) -> Result<Vec<f64>> {
        Ok(self.forward_batch(std::slice::from_ref(segment))?.row(0).to_vec())
    }

    pub fn forward_batch(&self, segments: &[SparseSegment]) -> Result<Matrix> {
        Ok(self.forward_batch_timed(segments)?.0)
    }

    /// Like [`DenseBaselineModel::forward_batch`], also reporting how long
    /// interpolation and the network took.
    pub fn forward_batch_timed(&self, segments: &[SparseSegment]) -> Result<(Matrix, StageTimes)> {
        let t0 = Instant::now();
        let dense = segments
            .iter()
            .map(|s| self.resample(s))
            .collect::<Result<Vec<_>>>()?;
        let x = self.design_matrix(&dense)?;
        let t1 = Instant::now();
        let out = self.mlp.forward(&x)?;
        let t2 = Instant::now();
        if !out.is_finite() {
            return Err(Error::NonFinite("baseline forward"));
        }
        Ok((
            out,
            StageTimes {
                interpolation: t1 - t0,
                network: t2 - t1,
            },
        ))
    }

    pub fn predict_batch(&self, segments: &[SparseSegment]) -> Result<Vec<usize>> {
        let probs = self.forward_batch(segments)?;
        Ok(probs.iter_rows().map(argmax).collect())
    }

    pub(crate) fn mlp_mut(&mut self) -> &mut Mlp {
        &mut self.mlp
    }
}

/// Free-function form of [`DenseBaselineModel::forward`].
pub fn baseline_forward(baseline: &DenseBaselineModel, segment: &SparseSegment) -> Result<Vec<f64>> {
    baseline.forward(segment)
}
