//! Sigmoid cross-entropy between target and predicted embeddings.
//!
//! With `p = sigmoid(target)` and `p_hat = sigmoid(prediction)` the loss is
//! `-1/(N D) sum [p ln p_hat + (1 - p) ln(1 - p_hat)]`, evaluated from the
//! prediction logits as `p softplus(-z) + (1 - p) softplus(z)` so it never
//! saturates. It is not zero at `prediction == target` but it is minimal
//! there: each term is a cross-entropy `H(p, p_hat) >= H(p)`.

use ndarray::{Array2, ArrayView2, Zip};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textemb::sgns::sigmoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    #[default]
    SigmoidCrossEntropy,
    /// Plain squared error between prediction and target, for comparison.
    MeanSquaredError,
}

/// Element-wise sigmoids of a batch's targets and predictions.
#[derive(Debug, Clone)]
pub struct BatchActivations {
    pub p: Array2<f64>,
    pub p_hat: Array2<f64>,
}

impl BatchActivations {
    pub fn new(targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<Self> {
        check(targets, predictions)?;
        Ok(Self {
            p: targets.mapv(sigmoid),
            p_hat: predictions.mapv(sigmoid),
        })
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn check(targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<()> {
    if targets.dim() != predictions.dim() {
        return Err(Error::DimensionMismatch {
            expected: targets.len(),
            actual: predictions.len(),
        });
    }
    if targets.is_empty() {
        return Err(Error::param("empty batch"));
    }
    if !targets.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("targets"));
    }
    if !predictions.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("predictions"));
    }
    Ok(())
}

/// Mean sigmoid cross-entropy over an `N x D` batch.
pub fn sigmoid_xent_loss(targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<f64> {
    check(targets, predictions)?;
    let mut total = 0.0;
    Zip::from(&targets).and(&predictions).for_each(|&t, &z| {
        let p = sigmoid(t);
        total += p * softplus(-z) + (1.0 - p) * softplus(z);
    });
    Ok(total / targets.len() as f64)
}

/// Gradient of [`sigmoid_xent_loss`] with respect to the prediction logits:
/// `(p_hat - p) / (N D)`.
pub fn sigmoid_xent_gradient(targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<Array2<f64>> {
    let act = BatchActivations::new(targets, predictions)?;
    let scale = 1.0 / targets.len() as f64;
    Ok((act.p_hat - act.p) * scale)
}

pub fn mse_loss(targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<f64> {
    check(targets, predictions)?;
    let mut total = 0.0;
    Zip::from(&targets)
        .and(&predictions)
        .for_each(|&t, &z| total += (z - t) * (z - t));
    Ok(total / targets.len() as f64)
}

pub fn mse_gradient(targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<Array2<f64>> {
    check(targets, predictions)?;
    let scale = 2.0 / targets.len() as f64;
    Ok((&predictions - &targets) * scale)
}

impl LossKind {
    pub fn loss(self, targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<f64> {
        match self {
            LossKind::SigmoidCrossEntropy => sigmoid_xent_loss(targets, predictions),
            LossKind::MeanSquaredError => mse_loss(targets, predictions),
        }
    }

    pub fn gradient(self, targets: ArrayView2<f64>, predictions: ArrayView2<f64>) -> Result<Array2<f64>> {
        match self {
            LossKind::SigmoidCrossEntropy => sigmoid_xent_gradient(targets, predictions),
            LossKind::MeanSquaredError => mse_gradient(targets, predictions),
        }
    }
}
