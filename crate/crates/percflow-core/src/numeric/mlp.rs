//! Dense feed-forward network with manual forward/backward passes.
//!
//! Layers are affine transforms `z = W x + b` with an element-wise
//! activation on every hidden layer; the output layer is affine. Weights
//! are row-major with shape `(out_dim, in_dim)`. Everything is `f64`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Activation applied to all hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the pre-activation `z`.
    #[inline]
    fn grad(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                1.0 - t * t
            }
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One affine layer, weights row-major `(out_dim, in_dim)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn affine(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for o in 0..self.out_dim {
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let mut acc = self.biases[o];
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            out.push(acc);
        }
    }
}

/// Multilayer perceptron: `layer_sizes[0]` inputs, `layer_sizes[last]` outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    activation: Activation,
    layers: Vec<Layer>,
}

/// Activation record produced by [`Mlp::forward`], consumed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input fed to each layer (`inputs[0]` is the network input).
    inputs: Vec<Vec<f64>>,
    /// Pre-activation of each layer.
    preacts: Vec<Vec<f64>>,
}

/// Per-parameter gradients mirroring [`Mlp`] shapes, plus the gradient
/// with respect to the network input.
#[derive(Debug, Clone)]
pub struct GradBundle {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub input: Vec<f64>,
}

impl GradBundle {
    /// All-zero gradients shaped like `net`.
    pub fn zeros_like(net: &Mlp) -> Self {
        GradBundle {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
            input: vec![0.0; net.input_dim()],
        }
    }

    /// `self += scale * other` over every parameter slot (input grad included).
    pub fn add_scaled(&mut self, other: &GradBundle, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
        for (x, y) in self.input.iter_mut().zip(&other.input) {
            *x += scale * y;
        }
    }

    /// Multiply every component by `scale`.
    pub fn scale(&mut self, scale: f64) {
        for a in self.weights.iter_mut().chain(self.biases.iter_mut()) {
            for x in a.iter_mut() {
                *x *= scale;
            }
        }
        for x in self.input.iter_mut() {
            *x *= scale;
        }
    }

    /// True when every component is finite.
    pub fn is_finite(&self) -> bool {
        self.weights
            .iter()
            .chain(self.biases.iter())
            .flat_map(|v| v.iter())
            .chain(self.input.iter())
            .all(|x| x.is_finite())
    }
}

impl Mlp {
    /// Build a network with uniform Xavier init: weights in
    /// `±sqrt(6/(fan_in+fan_out))`, biases zero.
    pub fn new<R: Rng + ?Sized>(
        layer_sizes: &[usize],
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::InvalidParameter(
                "network needs at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.iter().any(|&s| s == 0) {
            return Err(Error::InvalidParameter("layer sizes must be positive".into()));
        }
        let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
        for w in layer_sizes.windows(2) {
            let (in_dim, out_dim) = (w[0], w[1]);
            let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
            let weights = (0..in_dim * out_dim)
                .map(|_| rng.random_range(-limit..limit))
                .collect();
            layers.push(Layer {
                in_dim,
                out_dim,
                weights,
                biases: vec![0.0; out_dim],
            });
        }
        Ok(Mlp {
            layer_sizes: layer_sizes.to_vec(),
            activation,
            layers,
        })
    }

    /// Build a network from explicit parameters (used by tests and checkpoint loading).
    pub fn from_parts(
        layer_sizes: Vec<usize>,
        activation: Activation,
        layers: Vec<Layer>,
    ) -> Result<Self> {
        if layer_sizes.len() != layers.len() + 1 {
            return Err(Error::ShapeMismatch {
                context: "mlp layer count",
                expected: layer_sizes.len().saturating_sub(1),
                got: layers.len(),
            });
        }
        for (i, l) in layers.iter().enumerate() {
            if l.in_dim != layer_sizes[i]
                || l.out_dim != layer_sizes[i + 1]
                || l.weights.len() != l.in_dim * l.out_dim
                || l.biases.len() != l.out_dim
            {
                return Err(Error::ShapeMismatch {
                    context: "mlp layer dims",
                    expected: layer_sizes[i + 1] * layer_sizes[i],
                    got: l.weights.len(),
                });
            }
        }
        Ok(Mlp {
            layer_sizes,
            activation,
            layers,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Forward pass returning the output and the activation record
    /// needed by [`Mlp::backward`].
    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        if input.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp input",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let n = self.layers.len();
        let mut inputs = Vec::with_capacity(n);
        let mut preacts = Vec::with_capacity(n);
        let mut x = input.to_vec();
        for (li, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::with_capacity(layer.out_dim);
            layer.affine(&x, &mut z);
            inputs.push(std::mem::take(&mut x));
            let last = li + 1 == n;
            x = if last {
                z.clone()
            } else {
                z.iter().map(|&v| self.activation.apply(v)).collect()
            };
            preacts.push(z);
        }
        Ok((x, ForwardCache { inputs, preacts }))
    }

    /// Forward pass without the cache, for inference-only call sites.
    pub fn infer(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp input",
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let n = self.layers.len();
        let mut x = input.to_vec();
        let mut z = Vec::new();
        for (li, layer) in self.layers.iter().enumerate() {
            layer.affine(&x, &mut z);
            x.clear();
            if li + 1 == n {
                x.extend_from_slice(&z);
            } else {
                x.extend(z.iter().map(|&v| self.activation.apply(v)));
            }
        }
        Ok(x)
    }

    /// Backward pass: given `d loss / d output`, produce gradients for every
    /// parameter and for the network input.
    pub fn backward(&self, cache: &ForwardCache, output_grad: &[f64]) -> Result<GradBundle> {
        if cache.inputs.len() != self.layers.len() {
            return Err(Error::ShapeMismatch {
                context: "mlp cache",
                expected: self.layers.len(),
                got: cache.inputs.len(),
            });
        }
        if output_grad.len() != self.output_dim() {
            return Err(Error::ShapeMismatch {
                context: "mlp output grad",
                expected: self.output_dim(),
                got: output_grad.len(),
            });
        }
        let n = self.layers.len();
        let mut grads = GradBundle::zeros_like(self);
        let mut dy = output_grad.to_vec();
        for li in (0..n).rev() {
            let layer = &self.layers[li];
            let x = &cache.inputs[li];
            let z = &cache.preacts[li];
            if x.len() != layer.in_dim || z.len() != layer.out_dim {
                return Err(Error::ShapeMismatch {
                    context: "mlp cache layer",
                    expected: layer.in_dim,
                    got: x.len(),
                });
            }
            // dz = dy ⊙ act'(z) on hidden layers; output layer is affine.
            let dz: Vec<f64> = if li + 1 == n {
                dy
            } else {
                dy.iter()
                    .zip(z)
                    .map(|(&g, &zz)| g * self.activation.grad(zz))
                    .collect()
            };
            let dw = &mut grads.weights[li];
            for (o, &dzo) in dz.iter().enumerate() {
                grads.biases[li][o] = dzo;
                let row = &mut dw[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (slot, &xi) in row.iter_mut().zip(x) {
                    *slot = dzo * xi;
                }
            }
            // dx = Wᵀ dz, which is dy for the previous layer.
            let mut dx = vec![0.0; layer.in_dim];
            for (o, &dzo) in dz.iter().enumerate() {
                let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (slot, &w) in dx.iter_mut().zip(row) {
                    *slot += w * dzo;
                }
            }
            dy = dx;
        }
        grads.input = dy;
        Ok(grads)
    }
}
