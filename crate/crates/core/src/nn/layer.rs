//! Dense layers with manual forward/backward passes. Everything runs in
//! f64; the networks are small enough that gradient-check fidelity is
//! worth more than speed.

use rand::Rng;

/// Output nonlinearity of a dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
    Softmax,
}

/// Fully connected layer; weights are row-major `out x in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub input_dim: usize,
    pub output_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

/// Pre- and post-activation values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct LayerCache {
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
}

/// Gradient of one layer, shaped like its parameters.
#[derive(Debug, Clone)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerGrad {
    pub fn zeros_like(layer: &DenseLayer) -> Self {
        Self {
            weights: vec![0.0; layer.weights.len()],
            bias: vec![0.0; layer.bias.len()],
        }
    }
}

impl DenseLayer {
    /// Glorot-uniform initialization: weights in
    /// `+-sqrt(6 / (fan_in + fan_out))`, biases zero.
    pub fn init<R: Rng>(input_dim: usize, output_dim: usize, activation: Activation, rng: &mut R) -> Self {
        let limit = (6.0 / (input_dim + output_dim) as f64).sqrt();
        let weights = (0..input_dim * output_dim)
            .map(|_| rng.gen_range(-limit..=limit))
            .collect();
        Self {
            input_dim,
            output_dim,
            weights,
            bias: vec![0.0; output_dim],
            activation,
        }
    }

    pub fn zeros(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        Self {
            input_dim,
            output_dim,
            weights: vec![0.0; input_dim * output_dim],
            bias: vec![0.0; output_dim],
            activation,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, input: &[f64]) -> LayerCache {
        debug_assert_eq!(input.len(), self.input_dim);
        let mut pre = self.bias.clone();
        for o in 0..self.output_dim {
            let row = &self.weights[o * self.input_dim..(o + 1) * self.input_dim];
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            pre[o] += acc;
        }
        let post = match self.activation {
            Activation::Relu => pre.iter().map(|&v| v.max(0.0)).collect(),
            Activation::Tanh => pre.iter().map(|&v| v.tanh()).collect(),
            Activation::Linear => pre.clone(),
            Activation::Softmax => softmax(&pre),
        };
        LayerCache { pre, post }
    }

    /// Backward pass from the gradient w.r.t. the post-activation output.
    /// Accumulates parameter gradients and returns the gradient w.r.t.
    /// the input. Softmax layers must use [`DenseLayer::backward_from_pre`];
    /// their output gradient is only ever needed jointly with the loss.
    pub fn backward(
        &self,
        input: &[f64],
        cache: &LayerCache,
        grad_output: &[f64],
        grad: &mut LayerGrad,
    ) -> Vec<f64> {
        let grad_pre: Vec<f64> = match self.activation {
            Activation::Relu => cache
                .pre
                .iter()
                .zip(grad_output)
                .map(|(&p, &g)| if p > 0.0 { g } else { 0.0 })
                .collect(),
            Activation::Tanh => cache
                .post
                .iter()
                .zip(grad_output)
                .map(|(&y, &g)| g * (1.0 - y * y))
                .collect(),
            Activation::Linear => grad_output.to_vec(),
            Activation::Softmax => {
                panic!("softmax backward runs through backward_from_pre")
            }
        };
        self.backward_from_pre(input, &grad_pre, grad)
    }

    /// Backward pass from the gradient w.r.t. the pre-activation values.
    pub fn backward_from_pre(
        &self,
        input: &[f64],
        grad_pre: &[f64],
        grad: &mut LayerGrad,
    ) -> Vec<f64> {
        debug_assert_eq!(grad_pre.len(), self.output_dim);
        let mut grad_input = vec![0.0; self.input_dim];
        for o in 0..self.output_dim {
            let g = grad_pre[o];
            if g == 0.0 {
                continue;
            }
            grad.bias[o] += g;
            let row = o * self.input_dim;
            for i in 0..self.input_dim {
                grad.weights[row + i] += g * input[i];
                grad_input[i] += g * self.weights[row + i];
            }
        }
        grad_input
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / sum).collect()
}

/// Cross entropy of distribution `p` against target `target`.
pub fn cross_entropy(target: &[f64], p: &[f64]) -> f64 {
    target
        .iter()
        .zip(p)
        .map(|(&t, &q)| if t > 0.0 { -t * q.max(1e-300).ln() } else { 0.0 })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn softmax_sums_to_one_and_shift_invariant() {
        let logits = vec![0.3, -1.2, 4.0];
        let p = softmax(&logits);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let shifted: Vec<f64> = logits.iter().map(|v| v + 100.0).collect();
        let q = softmax(&shifted);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_layer_outputs_zero() {
        let layer = DenseLayer::zeros(4, 3, Activation::Tanh);
        let out = layer.forward(&[1.0, -2.0, 0.5, 3.0]);
        assert_eq!(out.post, vec![0.0; 3]);
    }

    #[test]
    fn relu_blocks_negative_preactivations() {
        let mut layer = DenseLayer::zeros(1, 2, Activation::Relu);
        layer.weights = vec![1.0, -1.0];
        let out = layer.forward(&[2.0]);
        assert_eq!(out.post, vec![2.0, 0.0]);
    }

    #[test]
    fn init_respects_fan_limit() {
        let mut rng = rng_from_seed(0);
        let layer = DenseLayer::init(64, 10, Activation::Tanh, &mut rng);
        let limit = (6.0 / 74.0f64).sqrt();
        assert!(layer.weights.iter().all(|w| w.abs() <= limit));
        assert!(layer.bias.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn linear_layer_backward_matches_manual_gradient() {
        // y = w x + b, L = y^2/2 -> dL/dw = y x, dL/db = y, dL/dx = y w.
        let mut layer = DenseLayer::zeros(1, 1, Activation::Linear);
        layer.weights = vec![3.0];
        layer.bias = vec![0.5];
        let x = [2.0];
        let cache = layer.forward(&x);
        let y = cache.post[0];
        let mut grad = LayerGrad::zeros_like(&layer);
        let gx = layer.backward(&x, &cache, &[y], &mut grad);
        assert!((grad.weights[0] - y * 2.0).abs() < 1e-12);
        assert!((grad.bias[0] - y).abs() < 1e-12);
        assert!((gx[0] - y * 3.0).abs() < 1e-12);
    }
}
