use serde::{Deserialize, Serialize};

use super::layer::{Activation, DenseLayer};
use super::loss::{nll_loss, softmax_nll_grad};
use super::matrix::{axpy, Matrix};
use crate::{Error, Result};

/// Stack of dense layers. Softmax may appear only on the last layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Activations recorded during a forward pass, consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct Trace {
    /// `activations[0]` is the network input, `activations[k+1]` the output of layer `k`.
    activations: Vec<Matrix>,
}

impl Trace {
    pub fn input(&self) -> &Matrix {
        &self.activations[0]
    }

    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("trace holds the input")
    }
}

/// Gradient of one layer's weights and bias.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

pub type Gradients = Vec<LayerGrad>;

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::dim("network needs at least one layer"));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].outputs() != pair[1].inputs() {
                return Err(Error::dim(format!(
                    "layer {k} outputs {} but layer {} expects {}",
                    pair[0].outputs(),
                    k + 1,
                    pair[1].inputs()
                )));
            }
            if pair[0].activation() == Activation::Softmax {
                return Err(Error::dim(format!(
                    "softmax is only allowed on the final layer (found on layer {k})"
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-initialised network with widths `dims[0] → dims[1] → … → dims[n]`.
    /// Hidden layers use ReLU; the last layer uses `output`.
    pub fn with_widths(dims: &[usize], output: Activation, seed: u64) -> Result<Self> {
        if dims.len() < 2 {
            return Err(Error::Config("need an input width and at least one layer".into()));
        }
        let n = dims.len() - 1;
        let layers = (0..n)
            .map(|k| {
                let act = if k + 1 == n { output } else { Activation::Relu };
                DenseLayer::glorot(dims[k], dims[k + 1], act, layer_seed(seed, k))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub(crate) fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].inputs()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs()
    }

    pub fn output_activation(&self) -> Activation {
        self.layers[self.layers.len() - 1].activation()
    }

    /// Widths including the input, e.g. `[3, 64, 128]`.
    pub fn widths(&self) -> Vec<usize> {
        std::iter::once(self.input_width())
            .chain(self.layers.iter().map(DenseLayer::outputs))
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.inputs() * l.outputs() + l.outputs())
            .sum()
    }

    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        let mut x = self.layers[0].forward(input)?;
        for layer in &self.layers[1..] {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: &Matrix) -> Result<Trace> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(input.clone());
        for layer in &self.layers {
            let next = layer.forward(activations.last().expect("nonempty"))?;
            activations.push(next);
        }
        Ok(Trace { activations })
    }

    /// Backpropagates `upstream` through the network.
    ///
    /// When the last layer is softmax, `upstream` is the gradient with respect
    /// to its logits (see [`softmax_nll_grad`]); otherwise it is the gradient
    /// with respect to the network output. Returns parameter gradients and the
    /// gradient with respect to the input.
    pub fn backward(&self, trace: &Trace, upstream: &Matrix) -> Result<(Gradients, Matrix)> {
        let out = trace.output();
        if upstream.shape() != out.shape() {
            return Err(Error::dim(format!(
                "upstream gradient {:?} does not match output {:?}",
                upstream.shape(),
                out.shape()
            )));
        }
        let mut grads: Vec<LayerGrad> = Vec::with_capacity(self.layers.len());
        let mut delta = upstream.clone();
        for (k, layer) in self.layers.iter().enumerate().rev() {
            // delta: d loss / d (post-activation output of layer k)
            if layer.activation() == Activation::Relu {
                let post = &trace.activations[k + 1];
                for (d, a) in delta.as_mut_slice().iter_mut().zip(post.as_slice()) {
                    if *a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let input = &trace.activations[k];
            let mut gw = Matrix::zeros(layer.outputs(), layer.inputs());
            let mut gb = vec![0.0; layer.outputs()];
            let mut dx = Matrix::zeros(input.rows(), layer.inputs());
            let w = layer.weights();
            for r in 0..input.rows() {
                let x_row = input.row(r);
                let d_row = delta.row(r);
                let dx_row = dx.row_mut(r);
                for (o, &d) in d_row.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    axpy(gw.row_mut(o), d, x_row);
                    axpy(dx_row, d, w.row(o));
                }
            }
            grads.push(LayerGrad {
                weights: gw,
                bias: gb,
            });
            delta = dx;
        }
        grads.reverse();
        Ok((grads, delta))
    }

    /// Mean NLL of a softmax-terminated network and its parameter gradients.
    pub fn loss_and_gradients(&self, input: &Matrix, labels: &[usize]) -> Result<(f64, Gradients)> {
        if self.output_activation() != Activation::Softmax {
            return Err(Error::dim("loss requires a softmax output layer"));
        }
        let trace = self.forward_trace(input)?;
        let loss = nll_loss(trace.output(), labels)?;
        let upstream = softmax_nll_grad(trace.output(), labels)?;
        let (grads, _) = self.backward(&trace, &upstream)?;
        Ok((loss, grads))
    }

    /// Flattened view of all parameters, layer by layer (weights then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.parameter_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights().as_slice());
            out.extend_from_slice(l.bias());
        }
        out
    }

    /// Overwrites parameters from the layout produced by [`Mlp::flat_params`].
    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.parameter_count() {
            return Err(Error::dim(format!(
                "expected {} parameters, got {}",
                self.parameter_count(),
                values.len()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let (w, b) = l.params_mut();
            w.copy_from_slice(&values[at..at + w.len()]);
            at += w.len();
            b.copy_from_slice(&values[at..at + b.len()]);
            at += b.len();
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights().is_finite() && l.bias().iter().all(|v| v.is_finite()))
    }
}

/// Flattens gradients in the same layout as [`Mlp::flat_params`].
pub fn flatten_gradients(grads: &[LayerGrad]) -> Vec<f64> {
    let mut out = Vec::new();
    for g in grads {
        out.extend_from_slice(g.weights.as_slice());
        out.extend_from_slice(&g.bias);
    }
    out
}

pub(crate) fn layer_seed(seed: u64, layer: usize) -> u64 {
    // splitmix64 finaliser so neighbouring seeds give unrelated layers
    let mut z = seed ^ (layer as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
