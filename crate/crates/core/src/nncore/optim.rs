use serde::{Deserialize, Serialize};

use super::mlp::{LayerGrad, Mlp};
use crate::{Error, Result};

/// RMSProp hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropConfig {
    pub lr: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for RmsPropConfig {
    fn default() -> Self {
        Self {
            lr: 1e-4,
            alpha: 0.99,
            epsilon: 1e-8,
            weight_decay: 1e-4,
        }
    }
}

impl RmsPropConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!(
                "learning rate must be nonnegative, got {}",
                self.lr
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config(format!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        Ok(())
    }
}

/// In-place RMSProp update on a flat parameter slice.
///
/// `g' = g + λθ; v ← αv + (1−α)g'²; θ ← θ − lr·g'/(√v + ε)`
pub fn rmsprop_update(cfg: &RmsPropConfig, params: &mut [f64], grads: &[f64], accum: &mut [f64]) {
    debug_assert_eq!(params.len(), grads.len());
    debug_assert_eq!(params.len(), accum.len());
    for ((theta, &g), v) in params.iter_mut().zip(grads).zip(accum.iter_mut()) {
        let g = g + cfg.weight_decay * *theta;
        *v = cfg.alpha * *v + (1.0 - cfg.alpha) * g * g;
        if cfg.lr != 0.0 {
            *theta -= cfg.lr * g / (v.sqrt() + cfg.epsilon);
        }
    }
}

/// Optimizer state for one [`Mlp`]: one squared-gradient average per parameter.
#[derive(Debug, Clone)]
pub struct RmsPropState {
    pub config: RmsPropConfig,
    accumulators: Vec<(Vec<f64>, Vec<f64>)>,
}

impl RmsPropState {
    pub fn new(config: RmsPropConfig, net: &Mlp) -> Self {
        let accumulators = net
            .layers()
            .iter()
            .map(|l| (vec![0.0; l.inputs() * l.outputs()], vec![0.0; l.outputs()]))
            .collect();
        Self { config, accumulators }
    }

    pub fn set_lr(&mut self, lr: f64) {
        self.config.lr = lr;
    }

    pub fn accumulators(&self) -> impl Iterator<Item = &f64> {
        self.accumulators.iter().flat_map(|(w, b)| w.iter().chain(b))
    }

    pub fn step(&mut self, net: &mut Mlp, grads: &[LayerGrad]) -> Result<()> {
        if grads.len() != net.layers().len() {
            return Err(Error::dim(format!(
                "{} layer gradients for {} layers",
                grads.len(),
                net.layers().len()
            )));
        }
        for ((layer, g), (vw, vb)) in net.layers_mut().iter_mut().zip(grads).zip(&mut self.accumulators) {
            let (w, b) = layer.params_mut();
            if w.len() != g.weights.as_slice().len() || b.len() != g.bias.len() {
                return Err(Error::dim("gradient shape does not match layer"));
            }
            rmsprop_update(&self.config, w, g.weights.as_slice(), vw);
            rmsprop_update(&self.config, b, &g.bias, vb);
        }
        Ok(())
    }
}

/// Free-function form of [`RmsPropState::step`].
pub fn rmsprop_step(state: &mut RmsPropState, net: &mut Mlp, grads: &[LayerGrad]) -> Result<()> {
    state.step(net, grads)
}
