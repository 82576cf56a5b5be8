use serde::{Deserialize, Serialize};

use crate::nncore::RmsPropConfig;
use crate::{Error, Result};

/// Optimisation and windowing settings shared by both model families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub lr: f64,
    pub lr_drop_factor: f64,
    /// First epoch (0-based) trained at `lr · lr_drop_factor`.
    pub lr_drop_epoch: usize,
    pub total_epochs: usize,
    pub weight_decay: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Window length δt in seconds.
    pub window_len: f64,
    /// Window step in seconds.
    pub stride: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 128,
            lr: 1e-4,
            lr_drop_factor: 0.1,
            lr_drop_epoch: 100,
            total_epochs: 150,
            weight_decay: 1e-4,
            alpha: 0.99,
            epsilon: 1e-8,
            seed: 0,
            window_len: 2.0,
            stride: 2.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.total_epochs == 0 {
            return Err(Error::Config("total_epochs must be at least 1".into()));
        }
        if self.lr_drop_epoch >= self.total_epochs {
            return Err(Error::Config(format!(
                "lr_drop_epoch ({}) must be below total_epochs ({})",
                self.lr_drop_epoch, self.total_epochs
            )));
        }
        if !(self.lr_drop_factor > 0.0 && self.lr_drop_factor.is_finite()) {
            return Err(Error::Config("lr_drop_factor must be positive".into()));
        }
        if !(self.window_len > 0.0 && self.stride > 0.0) {
            return Err(Error::Config("window_len and stride must be positive".into()));
        }
        self.optimizer().validate()
    }

    /// Learning rate used during `epoch` (0-based).
    pub fn lr_at(&self, epoch: usize) -> f64 {
        if epoch >= self.lr_drop_epoch {
            self.lr * self.lr_drop_factor
        } else {
            self.lr
        }
    }

    pub fn optimizer(&self) -> RmsPropConfig {
        RmsPropConfig {
            lr: self.lr,
            alpha: self.alpha,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
        }
    }
}
