//! Visual embedding: a feed-forward regressor from image feature vectors to
//! the text embedding space, trained with sigmoid cross-entropy, SGD with
//! momentum and a step learning-rate schedule.

mod io;
mod loss;
mod network;
mod optim;
mod train;

pub use io::{read_regressor, write_regressor, REGRESSOR_TAG};
pub use loss::{mse_gradient, mse_loss, sigmoid_xent_gradient, sigmoid_xent_loss, BatchActivations, LossKind};
pub use network::{Gradients, Layer, VisualRegressor};
pub use optim::{learning_rate, sgd_step};
pub use train::{train_visual, TrainReport, TrainingBatch};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textemb::Aggregation;

/// Hyper-parameters of the visual regressor and its optimiser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RegressorConfig {
    pub input_dim: usize,
    /// Hidden layer widths, each followed by a rectifier.
    pub hidden: Vec<usize>,
    pub output_dim: usize,
    pub batch_size: usize,
    pub initial_lr: f64,
    pub lr_step_iters: usize,
    pub lr_factor: f64,
    pub momentum: f64,
    pub max_iters: usize,
    pub loss: LossKind,
    /// How captions are turned into regression targets.
    pub aggregation: Aggregation,
    pub seed: u64,
}

impl Default for RegressorConfig {
    fn default() -> Self {
        Self {
            input_dim: 0,
            hidden: vec![512],
            output_dim: 0,
            batch_size: 120,
            initial_lr: 1e-3,
            lr_step_iters: 2000,
            lr_factor: 0.1,
            momentum: 0.9,
            max_iters: 3000,
            loss: LossKind::SigmoidCrossEntropy,
            aggregation: Aggregation::TfidfMean,
            seed: 1,
        }
    }
}

impl RegressorConfig {
    /// Desk-scale defaults for `input_dim -> output_dim`.
    pub fn new(input_dim: usize, output_dim: usize) -> Self {
        Self {
            input_dim,
            output_dim,
            ..Default::default()
        }
    }

    /// Full-scale schedule: a decade drop every 100k of 400k iterations.
    pub fn full_scale(input_dim: usize, output_dim: usize) -> Self {
        Self {
            lr_step_iters: 100_000,
            max_iters: 400_000,
            ..Self::new(input_dim, output_dim)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden.contains(&0) {
            return Err(Error::param("all layer dimensions must be positive"));
        }
        if self.batch_size == 0 || self.lr_step_iters == 0 {
            return Err(Error::param("batch_size and lr_step_iters must be positive"));
        }
        if !(self.lr_factor > 0.0 && self.lr_factor < 1.0) {
            return Err(Error::param("lr_factor must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.momentum) || self.initial_lr.is_nan() || self.initial_lr <= 0.0 {
            return Err(Error::param("momentum must lie in [0, 1) and initial_lr be positive"));
        }
        Ok(())
    }

    /// Layer shapes `(fan_in, fan_out)` from input to output.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut dims = vec![self.input_dim];
        dims.extend(&self.hidden);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }
}
