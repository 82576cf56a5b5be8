use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Softmax,
    None,
}

/// Fully connected layer `y = activation(x·Wᵀ + b)`, weights stored (out × in).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    weights: Matrix,
    bias: Vec<f64>,
    activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        if weights.rows() != bias.len() {
            return Err(Error::dim(format!(
                "bias of length {} does not match {} output units",
                bias.len(),
                weights.rows()
            )));
        }
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::dim("layer dimensions must be nonzero"));
        }
        if activation == Activation::Softmax && weights.rows() < 2 {
            return Err(Error::dim("softmax layer needs at least two outputs"));
        }
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights and zero bias.
    pub fn glorot(inputs: usize, outputs: usize, activation: Activation, seed: u64) -> Result<Self> {
        Self::new(init_params(outputs, inputs, seed), vec![0.0; outputs], activation)
    }

    #[inline]
    pub fn inputs(&self) -> usize {
        self.weights.cols()
    }

    #[inline]
    pub fn outputs(&self) -> usize {
        self.weights.rows()
    }

    #[inline]
    pub fn activation(&self) -> Activation {
        self.activation
    }

    #[inline]
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    #[inline]
    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub(crate) fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (self.weights.as_mut_slice(), &mut self.bias)
    }

    /// Affine part only: `x·Wᵀ + b`.
    pub fn pre_activation(&self, input: &Matrix) -> Result<Matrix> {
        if input.cols() != self.inputs() {
            return Err(Error::dim(format!(
                "layer expects {} inputs, got {}",
                self.inputs(),
                input.cols()
            )));
        }
        let mut z = input.matmul_transposed(&self.weights)?;
        for r in 0..z.rows() {
            for (v, b) in z.row_mut(r).iter_mut().zip(&self.bias) {
                *v += b;
            }
        }
        Ok(z)
    }

    pub fn forward(&self, input: &Matrix) -> Result<Matrix> {
        let mut z = self.pre_activation(input)?;
        apply_activation(self.activation, &mut z);
        Ok(z)
    }
}

/// Row-wise application of `act` in place.
pub fn apply_activation(act: Activation, z: &mut Matrix) {
    match act {
        Activation::None => {}
        Activation::Relu => {
            for v in z.as_mut_slice() {
                if *v < 0.0 {
                    *v = 0.0;
                }
            }
        }
        Activation::Softmax => {
            for r in 0..z.rows() {
                softmax_in_place(z.row_mut(r));
            }
        }
    }
}

/// Free-function form of [`DenseLayer::forward`].
pub fn dense_forward(layer: &DenseLayer, input: &Matrix) -> Result<Matrix> {
    layer.forward(input)
}

/// Numerically stable softmax; subtracts the maximum logit before exponentiating.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let mut out = logits.to_vec();
    softmax_in_place(&mut out);
    out
}

pub fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Glorot-uniform matrix in `[-√(6/(fan_in+fan_out)), √(6/(fan_in+fan_out))]`,
/// with `fan_out = rows` and `fan_in = cols`.
pub fn init_params(rows: usize, cols: usize, seed: u64) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.gen_range(-limit..=limit)).collect();
    Matrix::from_vec(rows, cols, data).expect("length matches by construction")
}
