//! Dense ReLU network and Adam, the classical DQN baseline approximator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// A fully connected network: ReLU on hidden layers, identity output.
///
/// Parameters are stored flat, layer by layer: the `out × in` weight matrix
/// (row-major, one row per output unit) followed by the `out` biases.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

/// `Σ_l (in_l · out_l + out_l)`.
pub fn parameter_count(layer_sizes: &[usize]) -> usize {
    layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

fn validate_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::config(
            "mlp.layer_sizes",
            format!("need at least input and output sizes, got {layer_sizes:?}"),
        ));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::config(
            "mlp.layer_sizes",
            format!("layer sizes must be positive, got {layer_sizes:?}"),
        ));
    }
    Ok(())
}

/// Glorot-uniform weights, zero biases.
pub fn build_mlp(layer_sizes: &[usize], seed: u64) -> Result<MlpModel> {
    validate_sizes(layer_sizes)?;
    let mut rng = stream_rng(seed, Stream::Init);
    let mut params = Vec::with_capacity(parameter_count(layer_sizes));
    for w in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        params.extend((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)));
        params.extend(std::iter::repeat_n(0.0, fan_out));
    }
    Ok(MlpModel {
        layer_sizes: layer_sizes.to_vec(),
        params,
    })
}

impl MlpModel {
    pub fn from_parameters(layer_sizes: Vec<usize>, params: Vec<f64>) -> Result<Self> {
        validate_sizes(&layer_sizes)?;
        let expected = parameter_count(&layer_sizes);
        if params.len() != expected {
            return Err(Error::usage(format!(
                "expected {expected} parameters for {layer_sizes:?}, got {}",
                params.len()
            )));
        }
        Ok(Self {
            layer_sizes,
            params,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// `(weights, biases)` of layer `l`.
    pub fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let offset = self.layer_offset(l);
        let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        let weights = &self.params[offset..offset + fan_in * fan_out];
        let biases = &self.params[offset + fan_in * fan_out..offset + fan_in * fan_out + fan_out];
        (weights, biases)
    }

    fn layer_offset(&self, l: usize) -> usize {
        parameter_count(&self.layer_sizes[..=l])
    }

    fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    fn check_input(&self, features: &[f64]) -> Result<()> {
        if features.len() != self.layer_sizes[0] {
            return Err(Error::usage(format!(
                "expected {} features, got {}",
                self.layer_sizes[0],
                features.len()
            )));
        }
        if let Some(x) = features.iter().find(|x| !x.is_finite()) {
            return Err(Error::usage(format!("non-finite feature {x}")));
        }
        Ok(())
    }

    /// Activations of every layer, input first. Hidden activations are
    /// post-ReLU.
    fn activations(&self, features: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layer_sizes.len());
        acts.push(features.to_vec());
        for l in 0..self.n_layers() {
            let (weights, biases) = self.layer(l);
            let input = &acts[l];
            let hidden = l + 1 < self.n_layers();
            let out: Vec<f64> = weights
                .chunks_exact(input.len())
                .zip(biases)
                .map(|(row, b)| {
                    let z = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
                    if hidden {
                        z.max(0.0)
                    } else {
                        z
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, features: &[f64]) -> Result<Vec<f64>> {
        self.check_input(features)?;
        Ok(self.activations(features).pop().expect("at least one layer"))
    }

    /// Gradient of `Σ_k loss_grad[k] · output_k` with respect to every
    /// parameter, in the flat parameter layout.
    pub fn backward(&self, features: &[f64], loss_grad: &[f64]) -> Result<Vec<f64>> {
        let (_, grad) = self.value_and_gradient(features, |_| loss_grad.to_vec())?;
        Ok(grad)
    }

    /// One forward pass; `loss_grad` maps the outputs to `∂L/∂output` and the
    /// outputs are returned with the backpropagated gradient of `L`.
    pub fn value_and_gradient(
        &self,
        features: &[f64],
        loss_grad: impl FnOnce(&[f64]) -> Vec<f64>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_input(features)?;
        let acts = self.activations(features);
        let outputs = acts.last().expect("at least one layer").clone();
        let mut delta = loss_grad(&outputs);
        if delta.len() != outputs.len() {
            return Err(Error::usage(format!(
                "loss gradient has {} entries, network has {} outputs",
                delta.len(),
                outputs.len()
            )));
        }
        let mut grad = vec![0.0; self.params.len()];
        for l in (0..self.n_layers()).rev() {
            let offset = self.layer_offset(l);
            let (fan_in, fan_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let input = &acts[l];
            let (gw, gb) = grad[offset..offset + fan_in * fan_out + fan_out].split_at_mut(fan_in * fan_out);
            for (o, &d) in delta.iter().enumerate() {
                gb[o] = d;
                for (g, x) in gw[o * fan_in..(o + 1) * fan_in].iter_mut().zip(input) {
                    *g = d * x;
                }
            }
            if l == 0 {
                break;
            }
            let (weights, _) = self.layer(l);
            // ReLU'(z) is 1 where the stored activation is positive.
            delta = (0..fan_in)
                .map(|i| {
                    if input[i] > 0.0 {
                        (0..fan_out).map(|o| weights[o * fan_in + i] * delta[o]).sum()
                    } else {
                        0.0
                    }
                })
                .collect();
        }
        Ok((outputs, grad))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n_params: usize, config: AdamConfig) -> Self {
        Self {
            config,
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step: 0,
        }
    }

    /// One bias-corrected Adam update of `params` along `-grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::usage(format!(
                "Adam shape mismatch: {} params, {} grads, {} moments",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut())
            .zip(self.second_moment.iter_mut())
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        }
        Ok(())
    }
}
