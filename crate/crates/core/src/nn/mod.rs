//! Dense-network engine: representation, dynamics and prediction
//! functions, joint BPTT training with Adam, gradient verification and
//! checkpoint persistence.

mod adam;
mod checkpoint;
mod gradcheck;
mod layer;
mod loss;
mod model;

pub use adam::AdamState;
pub use checkpoint::{load_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::{gradient_check, FD_STEP};
pub use layer::{cross_entropy, softmax, Activation, DenseLayer, LayerGrad};
pub use loss::{loss, loss_and_grads, UnrollSample};
pub use model::{ModelDims, ModelGrads, ModelWeights, HIDDEN_DIM, STATE_DIM};

use crate::error::{Error, Result};

/// Knobs of one optimization step.
#[derive(Debug, Clone, Copy)]
pub struct StepOptions {
    /// Gradient scale across each dynamics unroll boundary.
    pub dynamics_grad_scale: f64,
    /// Global L2 clip applied to the full gradient before Adam.
    pub max_grad_norm: f64,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            dynamics_grad_scale: 0.5,
            max_grad_norm: 5.0,
        }
    }
}

/// One BPTT training step: gradients through the unrolled dynamics into
/// the representation, clipped, then applied with Adam. Returns the
/// batch loss. A non-finite loss aborts before touching the weights.
pub fn bptt_step(
    weights: &mut ModelWeights,
    adam: &mut AdamState,
    batch: &[UnrollSample],
    options: &StepOptions,
) -> Result<f64> {
    let (loss, mut grads) = loss_and_grads(weights, batch, options.dynamics_grad_scale)?;
    if !loss.is_finite() {
        return Err(Error::NonFiniteLoss(format!(
            "batch of {} produced loss {loss}",
            batch.len()
        )));
    }
    let norm = grads.l2_norm();
    if !norm.is_finite() {
        return Err(Error::NonFiniteLoss(format!("gradient norm {norm}")));
    }
    if norm > options.max_grad_norm {
        grads.scale(options.max_grad_norm / norm);
    }
    let mut flat = weights.flatten();
    adam.update(&mut flat, &grads.flatten());
    weights.set_from_flat(&flat)?;
    Ok(loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn loss_decreases_on_a_learnable_target() {
        // 100 steps on one fixed batch must reduce the loss.
        let dims = ModelDims::new(6, 2, 10);
        let mut rng = rng_from_seed(33);
        let mut w = ModelWeights::init(dims, &mut rng);
        let mut adam = AdamState::new(w.param_count(), 1e-2);
        let batch: Vec<UnrollSample> = (0..8)
            .map(|_| {
                let k = 3;
                UnrollSample {
                    observation: (0..6).map(|_| rng.gen_range(0.0..1.0)).collect(),
                    actions: (0..k).map(|_| rng.gen_range(0..2)).collect(),
                    policy_targets: (0..=k)
                        .map(|i| if i % 2 == 0 { vec![1.0, 0.0] } else { vec![0.0, 1.0] })
                        .collect(),
                    value_targets: (0..=k).map(|i| i as f64).collect(),
                    reward_targets: (0..k).map(|_| 1.0).collect(),
                }
            })
            .collect();
        let opts = StepOptions::default();
        let first = bptt_step(&mut w, &mut adam, &batch, &opts).unwrap();
        let mut last = first;
        for _ in 0..99 {
            last = bptt_step(&mut w, &mut adam, &batch, &opts).unwrap();
        }
        assert!(
            last < 0.5 * first,
            "loss should fall substantially: {first} -> {last}"
        );
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let dims = ModelDims::new(6, 2, 10);
        let run = || {
            let mut rng = rng_from_seed(12);
            let mut w = ModelWeights::init(dims, &mut rng);
            let mut adam = AdamState::new(w.param_count(), 1e-3);
            let batch = vec![UnrollSample {
                observation: (0..6).map(|_| rng.gen_range(0.0..1.0)).collect(),
                actions: vec![0, 1, 0],
                policy_targets: vec![vec![0.5, 0.5]; 4],
                value_targets: vec![1.0; 4],
                reward_targets: vec![1.0; 3],
            }];
            for _ in 0..20 {
                bptt_step(&mut w, &mut adam, &batch, &StepOptions::default()).unwrap();
            }
            w.flatten()
        };
        assert_eq!(run(), run());
    }
}
