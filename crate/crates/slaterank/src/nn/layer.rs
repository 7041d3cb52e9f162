//! Dense layers with analytic two-pass backprop.
//!
//! The two model architectures in this crate are static, so there is no
//! general autodiff graph: `Mlp::forward` records every intermediate
//! activation and `Mlp::backward` consumes them in reverse. Activation
//! derivatives are recovered from the activations themselves (relu and
//! sigmoid both allow this), which keeps the forward pass allocation-light.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::matrix::Matrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Sigmoid,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => super::ops::sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation value `a = f(z)`.
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if a > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => a * (1.0 - a),
            Activation::Identity => 1.0,
        }
    }
}

/// Fully connected layer: `out = act(input * weights + bias)`.
///
/// `weights` is (fan_in x fan_out); `bias` has length fan_out.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    /// Uniform(-r, r) with r = sqrt(6 / (fan_in + fan_out)); bias starts at zero.
    pub fn xavier(fan_in: usize, fan_out: usize, activation: Activation, rng: &mut impl Rng) -> Self {
        let r = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut weights = Matrix::zeros(fan_in, fan_out);
        for v in weights.data_mut() {
            *v = rng.gen_range(-r..r);
        }
        DenseLayer {
            weights,
            bias: vec![0.0; fan_out],
            activation,
        }
    }

    pub fn fan_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.weights.cols()
    }

    fn validate(&self) -> Result<()> {
        if self.bias.len() != self.weights.cols() {
            return Err(Error::Config(format!(
                "bias length {} does not match layer width {}",
                self.bias.len(),
                self.weights.cols()
            )));
        }
        Ok(())
    }
}

/// Gradients for one dense layer, same shapes as the parameters.
#[derive(Clone, Debug)]
pub struct LayerGrads {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients for a whole MLP plus the gradient w.r.t. its input.
#[derive(Clone, Debug)]
pub struct MlpGrads {
    pub layers: Vec<LayerGrads>,
}

impl MlpGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        MlpGrads {
            layers: mlp
                .layers
                .iter()
                .map(|l| LayerGrads {
                    weights: Matrix::zeros(l.weights.rows(), l.weights.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &MlpGrads) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.data_mut().iter_mut().zip(b.weights.data()) {
                *x += y;
            }
            for (x, y) in a.bias.iter_mut().zip(&b.bias) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            for x in l.weights.data_mut() {
                *x *= factor;
            }
            for x in &mut l.bias {
                *x *= factor;
            }
        }
    }

    pub fn blocks(&self, prefix: &str) -> Vec<(String, &[f64])> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("{prefix}.{i}.w"), l.weights.data()));
            out.push((format!("{prefix}.{i}.b"), l.bias.as_slice()));
        }
        out
    }
}

/// A stack of dense layers applied in sequence.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<DenseLayer>,
}

impl Mlp {
    /// Builds `dims[0] -> dims[1] -> ... -> dims.last()` with `hidden_act`
    /// everywhere except the last layer, which uses `output_act`.
    pub fn new(
        dims: &[usize],
        hidden_act: Activation,
        output_act: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        assert!(dims.len() >= 2, "Mlp needs at least one layer");
        let mut layers = Vec::with_capacity(dims.len() - 1);
        for w in dims.windows(2) {
            let act = if layers.len() + 2 == dims.len() {
                output_act
            } else {
                hidden_act
            };
            layers.push(DenseLayer::xavier(w[0], w[1], act, rng));
        }
        Mlp { layers }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().unwrap().fan_out()
    }

    /// Runs the stack on a batch (rows = batch items) and returns every
    /// intermediate activation: `[input, a_1, ..., a_n]`. The trailing
    /// activation is the output.
    pub fn forward(&self, input: &Matrix) -> Result<Vec<Matrix>> {
        if input.cols() != self.input_dim() {
            return Err(Error::Config(format!(
                "input width {} does not match first layer fan-in {}",
                input.cols(),
                self.input_dim()
            )));
        }
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.clone());
        for layer in &self.layers {
            layer.validate()?;
            let mut z = acts.last().unwrap().matmul(&layer.weights)?;
            z.add_row_inplace(&layer.bias)?;
            for v in z.data_mut() {
                *v = layer.activation.apply(*v);
            }
            acts.push(z);
        }
        Ok(acts)
    }

    pub fn block_shapes(&self, prefix: &str) -> Vec<(String, usize)> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (i, l) in self.layers.iter().enumerate() {
            out.push((format!("{prefix}.{i}.w"), l.weights.data().len()));
            out.push((format!("{prefix}.{i}.b"), l.bias.len()));
        }
        out
    }

    pub fn param_blocks_mut(&mut self, prefix: &str) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for (i, l) in self.layers.iter_mut().enumerate() {
            let DenseLayer { weights, bias, .. } = l;
            out.push((format!("{prefix}.{i}.w"), weights.data_mut()));
            out.push((format!("{prefix}.{i}.b"), bias.as_mut_slice()));
        }
        out
    }

    /// Backpropagates `upstream` (same shape as the output activation)
    /// through activations produced by a matching `forward` call. Returns
    /// parameter gradients and the gradient w.r.t. the input.
    pub fn backward(&self, acts: &[Matrix], upstream: &Matrix) -> Result<(MlpGrads, Matrix)> {
        if acts.len() != self.layers.len() + 1 {
            return Err(Error::Config(format!(
                "activation count {} does not match layer count {}",
                acts.len(),
                self.layers.len()
            )));
        }
        let out = acts.last().unwrap();
        if upstream.rows() != out.rows() || upstream.cols() != out.cols() {
            return Err(Error::Config(format!(
                "upstream gradient {}x{} does not match output {}x{}",
                upstream.rows(),
                upstream.cols(),
                out.rows(),
                out.cols()
            )));
        }
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut g = upstream.clone();
        for (idx, layer) in self.layers.iter().enumerate().rev() {
            let a = &acts[idx + 1];
            // dZ = g * act'(a)
            let mut dz = g;
            for (v, av) in dz.data_mut().iter_mut().zip(a.data()) {
                *v *= layer.activation.derivative_from_output(*av);
            }
            let dw = acts[idx].matmul_tn(&dz)?;
            let db = dz.col_sums();
            g = dz.matmul_nt(&layer.weights)?;
            grads.push(LayerGrads {
                weights: dw,
                bias: db,
            });
        }
        grads.reverse();
        Ok((MlpGrads { layers: grads }, g))
    }
}

/// Embedding lookup table; one row per vocabulary entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingTable {
    pub values: Matrix,
}

impl EmbeddingTable {
    pub fn xavier(vocab_size: usize, dim: usize, rng: &mut impl Rng) -> Self {
        let r = (6.0 / (vocab_size + dim) as f64).sqrt();
        let mut values = Matrix::zeros(vocab_size, dim);
        for v in values.data_mut() {
            *v = rng.gen_range(-r..r);
        }
        EmbeddingTable { values }
    }

    pub fn vocab_size(&self) -> usize {
        self.values.rows()
    }

    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn lookup(&self, index: usize) -> Result<&[f64]> {
        if index >= self.vocab_size() {
            return Err(Error::Config(format!(
                "embedding index {} out of vocab {}",
                index,
                self.vocab_size()
            )));
        }
        Ok(self.values.row(index))
    }
}
