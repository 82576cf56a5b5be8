use serde::{Deserialize, Serialize};

use crate::dataio::{ActivitySpace, NormStats, SparseSegment};
use crate::nncore::{layer_seed, nll_loss, softmax_nll_grad, Activation, Gradients, Matrix, Mlp};
use crate::{Error, Result};

/// Hidden widths of the two networks. The last `phi` width is the embedding
/// size `z`; `rho` lists the classifier's hidden widths, its output layer
/// (one unit per activity, softmax) is appended automatically.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetArchitecture {
    pub phi: Vec<usize>,
    pub rho: Vec<usize>,
}

impl Default for SetArchitecture {
    fn default() -> Self {
        Self {
            phi: vec![64, 128, 256],
            rho: vec![128, 64],
        }
    }
}

impl SetArchitecture {
    pub fn validate(&self) -> Result<()> {
        if self.phi.is_empty() {
            return Err(Error::Config("phi needs at least one layer".into()));
        }
        if self.phi.iter().chain(&self.rho).any(|&w| w == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        Ok(())
    }

    pub fn z(&self) -> usize {
        *self.phi.last().expect("validated")
    }
}

/// Feature-wise max over a set of embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolResult {
    pub embedding: Vec<f64>,
    /// For each feature, the smallest row index attaining the maximum.
    pub argmax_index: Vec<usize>,
}

/// Max-pools the rows of `embeddings` (m × z).
pub fn pool(embeddings: &Matrix) -> Result<PoolResult> {
    pool_rows(embeddings, 0, embeddings.rows())
}

fn pool_rows(e: &Matrix, start: usize, end: usize) -> Result<PoolResult> {
    if end <= start {
        return Err(Error::EmptySegment);
    }
    let mut embedding = e.row(start).to_vec();
    let mut argmax_index = vec![0; e.cols()];
    for r in start + 1..end {
        for (j, &v) in e.row(r).iter().enumerate() {
            // strict comparison keeps the earliest row on ties
            if v > embedding[j] {
                embedding[j] = v;
                argmax_index[j] = r - start;
            }
        }
    }
    Ok(PoolResult {
        embedding,
        argmax_index,
    })
}

/// Number of distinct readings that supply at least one pooled feature.
pub fn contributing_count(pooled: &PoolResult) -> usize {
    let mut idx = pooled.argmax_index.clone();
    idx.sort_unstable();
    idx.dedup();
    idx.len()
}

/// Index of the largest probability; the lowest index wins ties.
pub fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

/// Set classifier: shared per-reading network `phi`, feature-wise max pool,
/// classifier `rho` with softmax output.
#[derive(Debug, Clone, PartialEq)]
pub struct SetModel {
    pub(crate) phi: Mlp,
    pub(crate) rho: Mlp,
    pub(crate) space: ActivitySpace,
    pub(crate) norm: NormStats,
}

/// Row-stacked normalized readings of several segments.
pub(crate) struct Stacked {
    pub matrix: Matrix,
    /// Segment `i` occupies rows `offsets[i]..offsets[i+1]`.
    pub offsets: Vec<usize>,
}

pub(crate) fn stack(segments: &[&SparseSegment], norm: &NormStats) -> Result<Stacked> {
    let d = norm.dim();
    let total: usize = segments.iter().map(|s| s.len()).sum();
    let mut data = Vec::with_capacity(total * d);
    let mut offsets = Vec::with_capacity(segments.len() + 1);
    offsets.push(0);
    for s in segments {
        if s.is_empty() {
            return Err(Error::EmptySegment);
        }
        for r in &s.readings {
            if r.dim() != d {
                return Err(Error::dim(format!(
                    "reading has {} channels, model expects {d}",
                    r.dim()
                )));
            }
            data.extend(
                r.channels
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| norm.scale_value(j, x)),
            );
        }
        offsets.push(offsets.last().expect("nonempty") + s.len());
    }
    Ok(Stacked {
        matrix: Matrix::from_vec(total, d, data)?,
        offsets,
    })
}

impl SetModel {
    pub fn new(
        d: usize,
        arch: &SetArchitecture,
        space: ActivitySpace,
        norm: NormStats,
        seed: u64,
    ) -> Result<Self> {
        arch.validate()?;
        if norm.dim() != d {
            return Err(Error::dim(format!(
                "normalizer covers {} channels, model input is {d}",
                norm.dim()
            )));
        }
        let phi_dims: Vec<usize> = std::iter::once(d).chain(arch.phi.iter().copied()).collect();
        let rho_dims: Vec<usize> = std::iter::once(arch.z())
            .chain(arch.rho.iter().copied())
            .chain(std::iter::once(space.len()))
            .collect();
        let phi = Mlp::with_widths(&phi_dims, Activation::Relu, layer_seed(seed, 100))?;
        let rho = Mlp::with_widths(&rho_dims, Activation::Softmax, layer_seed(seed, 200))?;
        Self::from_parts(phi, rho, space, norm)
    }

    pub fn from_parts(phi: Mlp, rho: Mlp, space: ActivitySpace, norm: NormStats) -> Result<Self> {
        if phi.output_width() != rho.input_width() {
            return Err(Error::dim(format!(
                "phi emits {} features but rho expects {}",
                phi.output_width(),
                rho.input_width()
            )));
        }
        if rho.output_width() != space.len() || rho.output_activation() != Activation::Softmax {
            return Err(Error::dim(format!(
                "rho must end in a softmax over {} activities",
                space.len()
            )));
        }
        if phi.output_activation() == Activation::Softmax {
            return Err(Error::dim("phi must not end in softmax"));
        }
        if phi.input_width() != norm.dim() {
            return Err(Error::dim("normalizer width does not match phi input"));
        }
        Ok(Self {
            phi,
            rho,
            space,
            norm,
        })
    }

    pub fn phi(&self) -> &Mlp {
        &self.phi
    }

    pub fn rho(&self) -> &Mlp {
        &self.rho
    }

    pub fn activity_space(&self) -> &ActivitySpace {
        &self.space
    }

    pub fn norm(&self) -> &NormStats {
        &self.norm
    }

    pub fn dim(&self) -> usize {
        self.phi.input_width()
    }

    pub fn z(&self) -> usize {
        self.phi.output_width()
    }

    pub fn architecture(&self) -> SetArchitecture {
        let phi = self.phi.widths()[1..].to_vec();
        let rho = self.rho.widths();
        SetArchitecture {
            phi,
            rho: rho[1..rho.len() - 1].to_vec(),
        }
    }

    /// `phi` applied to every (normalized) reading: (m × z).
    pub fn embed_samples(&self, segment: &SparseSegment) -> Result<Matrix> {
        let stacked = stack(&[segment], &self.norm)?;
        self.phi.forward(&stacked.matrix)
    }

    pub fn pool_segment(&self, segment: &SparseSegment) -> Result<PoolResult> {
        pool(&self.embed_samples(segment)?)
    }

    /// Activity probabilities for one segment.
    pub fn forward(&self, segment: &SparseSegment) -> Result<Vec<f64>> {
        Ok(self.forward_batch(std::slice::from_ref(segment))?.row(0).to_vec())
    }

    pub fn predict(&self, segment: &SparseSegment) -> Result<usize> {
        Ok(argmax(&self.forward(segment)?))
    }

    /// Pooled embeddings of many segments in one pass: (n × z).
    pub fn pooled_batch(&self, segments: &[SparseSegment]) -> Result<(Matrix, Vec<PoolResult>)> {
        let refs: Vec<&SparseSegment> = segments.iter().collect();
        let stacked = stack(&refs, &self.norm)?;
        let e = self.phi.forward(&stacked.matrix)?;
        let mut pooled = Matrix::zeros(segments.len(), self.z());
        let mut results = Vec::with_capacity(segments.len());
        for (i, w) in stacked.offsets.windows(2).enumerate() {
            let p = pool_rows(&e, w[0], w[1])?;
            pooled.row_mut(i).copy_from_slice(&p.embedding);
            results.push(p);
        }
        Ok((pooled, results))
    }

    /// Probabilities for many segments (n × c). Each row equals
    /// [`SetModel::forward`] on that segment alone.
    pub fn forward_batch(&self, segments: &[SparseSegment]) -> Result<Matrix> {
        if segments.is_empty() {
            return Ok(Matrix::zeros(0, self.space.len()));
        }
        let (pooled, _) = self.pooled_batch(segments)?;
        let out = self.rho.forward(&pooled)?;
        if !out.is_finite() {
            return Err(Error::NonFinite("set model forward"));
        }
        Ok(out)
    }

    pub fn predict_batch(&self, segments: &[SparseSegment]) -> Result<Vec<usize>> {
        let probs = self.forward_batch(segments)?;
        Ok(probs.iter_rows().map(argmax).collect())
    }

    /// Mean NLL over `segments` and its gradients for `phi` and `rho`.
    ///
    /// Each segment is pooled over its own readings only; the pooled-feature
    /// gradient flows to the reading selected by the pool.
    pub fn loss_and_gradients(&self, segments: &[&SparseSegment]) -> Result<(f64, Gradients, Gradients)> {
        let stacked = stack(segments, &self.norm)?;
        let phi_trace = self.phi.forward_trace(&stacked.matrix)?;
        let e = phi_trace.output();
        let mut pooled = Matrix::zeros(segments.len(), self.z());
        let mut winners: Vec<Vec<usize>> = Vec::with_capacity(segments.len());
        for (i, w) in stacked.offsets.windows(2).enumerate() {
            let p = pool_rows(e, w[0], w[1])?;
            pooled.row_mut(i).copy_from_slice(&p.embedding);
            winners.push(p.argmax_index.iter().map(|&r| r + w[0]).collect());
        }
        let labels: Vec<usize> = segments.iter().map(|s| s.label).collect();
        let rho_trace = self.rho.forward_trace(&pooled)?;
        let loss = nll_loss(rho_trace.output(), &labels)?;
        let upstream = softmax_nll_grad(rho_trace.output(), &labels)?;
        let (rho_grads, d_pooled) = self.rho.backward(&rho_trace, &upstream)?;

        let mut d_e = Matrix::zeros(e.rows(), e.cols());
        for (i, rows) in winners.iter().enumerate() {
            for (j, &r) in rows.iter().enumerate() {
                let g = d_pooled.get(i, j);
                d_e.set(r, j, d_e.get(r, j) + g);
            }
        }
        let (phi_grads, _) = self.phi.backward(&phi_trace, &d_e)?;
        Ok((loss, phi_grads, rho_grads))
    }

    pub(crate) fn nets_mut(&mut self) -> (&mut Mlp, &mut Mlp) {
        (&mut self.phi, &mut self.rho)
    }

    pub fn is_finite(&self) -> bool {
        self.phi.is_finite() && self.rho.is_finite()
    }
}
