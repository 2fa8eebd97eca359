use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Negative-side slope of the hidden-layer rectifier.
pub const LEAKY_SLOPE: f64 = 0.01;

/// Fully-connected network: leaky rectifier on hidden layers, identity on
/// the output layer. Weights are stored row-major per layer
/// (`out x in`), which is also the JSON checkpoint layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

/// Parameter gradients plus the gradient with respect to the input, so
/// losses can chain through shared downstream layers.
#[derive(Debug, Clone)]
pub struct MlpGradients {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
    pub d_input: Vec<f64>,
}

impl Mlp {
    /// Zero-initialized network with the given layer sizes.
    pub fn zeros(sizes: &[usize]) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::validation("a network needs at least two layer sizes"));
        }
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::validation("layer sizes must be positive"));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            weights.push(vec![0.0; w[0] * w[1]]);
            biases.push(vec![0.0; w[1]]);
        }
        Ok(Mlp { sizes: sizes.to_vec(), weights, biases })
    }

    /// Uniform Glorot initialization from the caller's generator.
    pub fn xavier<R: Rng>(sizes: &[usize], rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(sizes)?;
        for (l, w) in net.weights.iter_mut().enumerate() {
            let bound = (6.0 / (net.sizes[l] + net.sizes[l + 1]) as f64).sqrt();
            for v in w.iter_mut() {
                *v = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
                context: "network input",
            });
        }
        Ok(())
    }

    /// Forward pass.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.forward_trace(x).pop().unwrap())
    }

    /// Activations of every layer, input first, output last.
    fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(x.to_vec());
        for l in 0..self.layer_count() {
            let n_in = self.sizes[l];
            let last = l + 1 == self.layer_count();
            let prev = &acts[l];
            let w = &self.weights[l];
            let mut out = self.biases[l].clone();
            for (o, out_v) in out.iter_mut().enumerate() {
                let row = &w[o * n_in..(o + 1) * n_in];
                let mut acc = 0.0;
                for (a, b) in row.iter().zip(prev) {
                    acc += a * b;
                }
                *out_v += acc;
                if !last && *out_v < 0.0 {
                    *out_v *= LEAKY_SLOPE;
                }
            }
            acts.push(out);
        }
        acts
    }

    /// Exact gradients of `upstream . output` with respect to every
    /// parameter and to the input.
    pub fn gradients(&self, x: &[f64], upstream: &[f64]) -> Result<MlpGradients> {
        let mut grads = MlpGradients::zeros_like(self);
        self.accumulate_gradients(x, upstream, 1.0, &mut grads)?;
        Ok(grads)
    }

    /// Adds `scale` times the gradients into an existing accumulator
    /// (the minibatch hot path; avoids per-sample allocation).
    pub fn accumulate_gradients(
        &self,
        x: &[f64],
        upstream: &[f64],
        scale: f64,
        into: &mut MlpGradients,
    ) -> Result<()> {
        self.check_input(x)?;
        if upstream.len() != self.output_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.output_dim(),
                got: upstream.len(),
                context: "upstream gradient",
            });
        }
        let acts = self.forward_trace(x);
        let mut delta = upstream.to_vec();
        for l in (0..self.layer_count()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let last = l + 1 == self.layer_count();
            if !last {
                // activation derivative evaluated from the stored outputs;
                // the leaky rectifier is invertible in sign
                for (d, &a) in delta.iter_mut().zip(&acts[l + 1]) {
                    if a < 0.0 {
                        *d *= LEAKY_SLOPE;
                    }
                }
            }
            let prev = &acts[l];
            let dw = &mut into.d_weights[l];
            for o in 0..n_out {
                let g = scale * delta[o];
                into.d_biases[l][o] += g;
                let row = &mut dw[o * n_in..(o + 1) * n_in];
                for (slot, &p) in row.iter_mut().zip(prev) {
                    *slot += g * p;
                }
            }
            let mut next_delta = vec![0.0; n_in];
            let w = &self.weights[l];
            for o in 0..n_out {
                let g = delta[o];
                let row = &w[o * n_in..(o + 1) * n_in];
                for (nd, &wv) in next_delta.iter_mut().zip(row) {
                    *nd += g * wv;
                }
            }
            delta = next_delta;
        }
        for (slot, d) in into.d_input.iter_mut().zip(&delta) {
            *slot += scale * d;
        }
        Ok(())
    }

    /// In-place gradient-descent step.
    pub fn sgd_step(&mut self, grads: &MlpGradients, lr: f64) {
        for (w, dw) in self.weights.iter_mut().zip(&grads.d_weights) {
            for (v, d) in w.iter_mut().zip(dw) {
                *v -= lr * d;
            }
        }
        for (b, db) in self.biases.iter_mut().zip(&grads.d_biases) {
            for (v, d) in b.iter_mut().zip(db) {
                *v -= lr * d;
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let net: Mlp = serde_json::from_str(text)?;
        if net.weights.len() != net.sizes.len() - 1 || net.biases.len() != net.weights.len() {
            return Err(Error::Parse("inconsistent checkpoint layer counts".into()));
        }
        for l in 0..net.weights.len() {
            if net.weights[l].len() != net.sizes[l] * net.sizes[l + 1]
                || net.biases[l].len() != net.sizes[l + 1]
            {
                return Err(Error::Parse(format!("bad checkpoint dimensions at layer {l}")));
            }
        }
        Ok(net)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl MlpGradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        MlpGradients {
            d_weights: net.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            d_biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
            d_input: vec![0.0; net.input_dim()],
        }
    }

    pub fn accumulate(&mut self, other: &MlpGradients, scale: f64) {
        for (a, b) in self.d_weights.iter_mut().zip(&other.d_weights) {
            for (v, d) in a.iter_mut().zip(b) {
                *v += scale * d;
            }
        }
        for (a, b) in self.d_biases.iter_mut().zip(&other.d_biases) {
            for (v, d) in a.iter_mut().zip(b) {
                *v += scale * d;
            }
        }
    }
}
