use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::RegressorConfig;
use crate::error::{Error, Result};

/// Affine layer `y = x W^T + b` with `W` of shape `(fan_out, fan_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weights: Array2::zeros((fan_out, fan_in)),
            bias: Array1::zeros(fan_out),
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.nrows()
    }
}

/// Per-layer parameter gradients, shaped like the layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

/// Feed-forward regressor `F -> hidden... -> D`, rectifiers between layers
/// and a linear output.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualRegressor {
    pub layers: Vec<Layer>,
    pub config: RegressorConfig,
    pub iteration: usize,
    pub(crate) velocity: Vec<Layer>,
}

/// Pre-activations and activations kept for back-propagation.
pub(crate) struct Trace {
    /// `inputs[l]` is the input of layer `l` (post-rectifier for l > 0).
    pub inputs: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl VisualRegressor {
    /// Initialises weights uniformly in `+-sqrt(6 / fan_in)` and biases at zero.
    pub fn new(config: RegressorConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let layers: Vec<Layer> = config
            .layer_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let bound = (6.0 / fan_in as f64).sqrt();
                Layer {
                    weights: Array2::from_shape_fn((fan_out, fan_in), |_| rng.random_range(-bound..bound)),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self::from_layers(layers, config))
    }

    pub fn from_layers(layers: Vec<Layer>, config: RegressorConfig) -> Self {
        let velocity = layers.iter().map(|l| Layer::zeros(l.fan_in(), l.fan_out())).collect();
        Self {
            layers,
            config,
            iteration: 0,
            velocity,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("at least one layer").fan_out()
    }

    /// Joint-space embedding (pre-sigmoid) of one feature vector.
    pub fn forward(&self, feature: &[f32]) -> Result<Vec<f64>> {
        if feature.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: feature.len(),
            });
        }
        let x = Array2::from_shape_fn((1, feature.len()), |(_, j)| feature[j] as f64);
        Ok(self.forward_batch(x.view())?.row(0).to_vec())
    }

    /// Embeds every row of an `N x F` batch.
    pub fn forward_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(self.trace(x)?.output)
    }

    pub(crate) fn trace(&self, x: ArrayView2<f64>) -> Result<Trace> {
        if x.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                actual: x.ncols(),
            });
        }
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut a = x.to_owned();
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let mut z = a.dot(&layer.weights.t());
            z += &layer.bias;
            if l < last {
                z.mapv_inplace(|v| v.max(0.0));
            }
            inputs.push(std::mem::replace(&mut a, z));
        }
        Ok(Trace { inputs, output: a })
    }

    /// Back-propagates `d_output` (gradient w.r.t. the output logits) to
    /// every weight and bias.
    pub(crate) fn backward(&self, trace: &Trace, d_output: Array2<f64>) -> Gradients {
        let mut delta = d_output;
        let mut grads = Vec::with_capacity(self.layers.len());
        for l in (0..self.layers.len()).rev() {
            let input = &trace.inputs[l];
            let weights = delta.t().dot(input);
            let bias = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut next = delta.dot(&self.layers[l].weights);
                // rectifier derivative: the layer input was clamped at zero
                next.zip_mut_with(input, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = next;
            }
            grads.push(Layer { weights, bias });
        }
        grads.reverse();
        Gradients { layers: grads }
    }

    /// Loss and parameter gradients for one batch.
    pub fn loss_and_gradients(&self, features: ArrayView2<f64>, targets: ArrayView2<f64>) -> Result<(f64, Gradients)> {
        let trace = self.trace(features)?;
        let loss = self.config.loss.loss(targets, trace.output.view())?;
        let d_out = self.config.loss.gradient(targets, trace.output.view())?;
        Ok((loss, self.backward(&trace, d_out)))
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|x| x.is_finite()))
    }
}
