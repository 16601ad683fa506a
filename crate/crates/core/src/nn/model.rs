//! The representation, dynamics and prediction functions.

use rand::Rng;

use crate::error::{Error, Result};

use super::layer::{Activation, DenseLayer, LayerGrad};

/// Hidden-state width shared by all three functions.
pub const STATE_DIM: usize = 10;
/// Hidden-layer width of every function.
pub const HIDDEN_DIM: usize = 64;

/// Shape of a model: everything needed to rebuild the layer stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub obs_dim: usize,
    pub action_count: usize,
    pub state_dim: usize,
    pub hidden_dim: usize,
    /// Look-ahead window the observation was built with; carried in
    /// checkpoints so an agent can sanity-check its environment.
    pub window: usize,
}

impl ModelDims {
    pub fn new(obs_dim: usize, action_count: usize, window: usize) -> Self {
        Self {
            obs_dim,
            action_count,
            state_dim: STATE_DIM,
            hidden_dim: HIDDEN_DIM,
            window,
        }
    }
}

/// Parameters of the three networks.
///
/// * representation: observation -> hidden(relu) -> state (tanh)
/// * dynamics: state ++ one-hot action -> hidden(relu) -> {state (tanh), reward (linear)}
/// * prediction: state -> hidden(relu) -> {policy (softmax), value (linear)}
#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub dims: ModelDims,
    pub repr_hidden: DenseLayer,
    pub repr_state: DenseLayer,
    pub dyn_hidden: DenseLayer,
    pub dyn_state: DenseLayer,
    pub dyn_reward: DenseLayer,
    pub pred_hidden: DenseLayer,
    pub pred_policy: DenseLayer,
    pub pred_value: DenseLayer,
}

impl ModelWeights {
    pub fn init<R: Rng>(dims: ModelDims, rng: &mut R) -> Self {
        let (s, h, n) = (dims.state_dim, dims.hidden_dim, dims.action_count);
        Self {
            dims,
            repr_hidden: DenseLayer::init(dims.obs_dim, h, Activation::Relu, rng),
            repr_state: DenseLayer::init(h, s, Activation::Tanh, rng),
            dyn_hidden: DenseLayer::init(s + n, h, Activation::Relu, rng),
            dyn_state: DenseLayer::init(h, s, Activation::Tanh, rng),
            dyn_reward: DenseLayer::init(h, 1, Activation::Linear, rng),
            pred_hidden: DenseLayer::init(s, h, Activation::Relu, rng),
            pred_policy: DenseLayer::init(h, n, Activation::Softmax, rng),
            pred_value: DenseLayer::init(h, 1, Activation::Linear, rng),
        }
    }

    pub fn zeros(dims: ModelDims) -> Self {
        let (s, h, n) = (dims.state_dim, dims.hidden_dim, dims.action_count);
        Self {
            dims,
            repr_hidden: DenseLayer::zeros(dims.obs_dim, h, Activation::Relu),
            repr_state: DenseLayer::zeros(h, s, Activation::Tanh),
            dyn_hidden: DenseLayer::zeros(s + n, h, Activation::Relu),
            dyn_state: DenseLayer::zeros(h, s, Activation::Tanh),
            dyn_reward: DenseLayer::zeros(h, 1, Activation::Linear),
            pred_hidden: DenseLayer::zeros(s, h, Activation::Relu),
            pred_policy: DenseLayer::zeros(h, n, Activation::Softmax),
            pred_value: DenseLayer::zeros(h, 1, Activation::Linear),
        }
    }

    /// Layers in the frozen serialization order.
    pub fn layers(&self) -> [&DenseLayer; 8] {
        [
            &self.repr_hidden,
            &self.repr_state,
            &self.dyn_hidden,
            &self.dyn_state,
            &self.dyn_reward,
            &self.pred_hidden,
            &self.pred_policy,
            &self.pred_value,
        ]
    }

    pub fn layers_mut(&mut self) -> [&mut DenseLayer; 8] {
        [
            &mut self.repr_hidden,
            &mut self.repr_state,
            &mut self.dyn_hidden,
            &mut self.dyn_state,
            &mut self.dyn_reward,
            &mut self.pred_hidden,
            &mut self.pred_policy,
            &mut self.pred_value,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|l| l.param_count()).sum()
    }

    /// All parameters in serialization order: per layer, weights then bias.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in self.layers() {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    pub fn set_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Dimension(format!(
                "expected {} parameters, got {}",
                self.param_count(),
                flat.len()
            )));
        }
        let mut cursor = 0;
        for layer in self.layers_mut() {
            let w = layer.weights.len();
            layer.weights.copy_from_slice(&flat[cursor..cursor + w]);
            cursor += w;
            let b = layer.bias.len();
            layer.bias.copy_from_slice(&flat[cursor..cursor + b]);
            cursor += b;
        }
        Ok(())
    }

    /// Encodes an observation into the initial hidden state.
    pub fn represent(&self, observation: &[f64]) -> Result<Vec<f64>> {
        if observation.len() != self.dims.obs_dim {
            return Err(Error::Dimension(format!(
                "observation length {} does not match obs_dim {}",
                observation.len(),
                self.dims.obs_dim
            )));
        }
        let h = self.repr_hidden.forward(observation);
        Ok(self.repr_state.forward(&h.post).post)
    }

    /// Advances the hidden state under a hypothetical action, predicting
    /// the transition reward along the way.
    pub fn dynamics(&self, state: &[f64], action: usize) -> Result<(Vec<f64>, f64)> {
        if state.len() != self.dims.state_dim {
            return Err(Error::Dimension(format!(
                "state length {} does not match state_dim {}",
                state.len(),
                self.dims.state_dim
            )));
        }
        if action >= self.dims.action_count {
            return Err(Error::Usage(format!(
                "action {action} out of range (N = {})",
                self.dims.action_count
            )));
        }
        let input = self.dynamics_input(state, action);
        let h = self.dyn_hidden.forward(&input);
        let next = self.dyn_state.forward(&h.post).post;
        let reward = self.dyn_reward.forward(&h.post).post[0];
        Ok((next, reward))
    }

    /// Policy and value read-out of a hidden state.
    pub fn predict(&self, state: &[f64]) -> Result<(Vec<f64>, f64)> {
        if state.len() != self.dims.state_dim {
            return Err(Error::Dimension(format!(
                "state length {} does not match state_dim {}",
                state.len(),
                self.dims.state_dim
            )));
        }
        let h = self.pred_hidden.forward(state);
        let policy = self.pred_policy.forward(&h.post).post;
        let value = self.pred_value.forward(&h.post).post[0];
        Ok((policy, value))
    }

    pub(crate) fn dynamics_input(&self, state: &[f64], action: usize) -> Vec<f64> {
        let mut input = Vec::with_capacity(self.dims.state_dim + self.dims.action_count);
        input.extend_from_slice(state);
        for a in 0..self.dims.action_count {
            input.push(if a == action { 1.0 } else { 0.0 });
        }
        input
    }
}

/// Gradients shaped like [`ModelWeights`], in the same layer order.
#[derive(Debug, Clone)]
pub struct ModelGrads {
    pub layers: Vec<LayerGrad>,
}

impl ModelGrads {
    pub fn zeros_like(weights: &ModelWeights) -> Self {
        Self {
            layers: weights.layers().iter().map(|l| LayerGrad::zeros_like(l)).collect(),
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for layer in &self.layers {
            out.extend_from_slice(&layer.weights);
            out.extend_from_slice(&layer.bias);
        }
        out
    }

    pub fn l2_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(l.bias.iter()))
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for layer in &mut self.layers {
            for g in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *g *= factor;
            }
        }
    }
}
