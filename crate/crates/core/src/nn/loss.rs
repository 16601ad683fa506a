//! Joint unroll loss of the three networks and its gradients.
//!
//! For a sampled sequence the representation encodes the observation,
//! the dynamics function is unrolled through the stored actions, and the
//! prediction function reads out policy and value at every unroll step:
//!
//! `L = sum_k [ (v_k - z_k)^2 + CE(pi_k, p_k) ] + sum_{k>=1} (r_k - u_k)^2`
//!
//! averaged over the batch. Gradients flow through the whole unroll; the
//! contribution entering a hidden state from the next unroll step is
//! scaled by `dynamics_grad_scale` (0.5 during training, 1.0 when the
//! gradient is checked against finite differences).

use crate::error::{Error, Result};

use super::layer::{cross_entropy, LayerCache};
use super::model::{ModelGrads, ModelWeights};

/// One training sequence: an observation, the actions that followed and
/// the targets per unroll step. `actions`, `reward_targets` have length
/// K; `policy_targets`, `value_targets` length K+1 (step 0 is the root).
#[derive(Debug, Clone)]
pub struct UnrollSample {
    pub observation: Vec<f64>,
    pub actions: Vec<usize>,
    pub policy_targets: Vec<Vec<f64>>,
    pub value_targets: Vec<f64>,
    pub reward_targets: Vec<f64>,
}

impl UnrollSample {
    fn validate(&self, weights: &ModelWeights) -> Result<()> {
        let k = self.actions.len();
        if self.reward_targets.len() != k
            || self.policy_targets.len() != k + 1
            || self.value_targets.len() != k + 1
        {
            return Err(Error::Dimension(format!(
                "unroll sample with {k} actions needs {k} reward targets and {} policy/value targets",
                k + 1
            )));
        }
        if self.observation.len() != weights.dims.obs_dim {
            return Err(Error::Dimension("observation length mismatch".into()));
        }
        for pi in &self.policy_targets {
            if pi.len() != weights.dims.action_count {
                return Err(Error::Dimension("policy target length mismatch".into()));
            }
        }
        Ok(())
    }
}

struct StepForward {
    state: Vec<f64>,
    pred_hidden: LayerCache,
    policy: LayerCache,
    value: LayerCache,
    // Dynamics caches for steps k >= 1.
    dyn_input: Option<Vec<f64>>,
    dyn_hidden: Option<LayerCache>,
    dyn_state: Option<LayerCache>,
    dyn_reward: Option<LayerCache>,
}

struct SampleForward {
    repr_hidden: LayerCache,
    repr_state: LayerCache,
    steps: Vec<StepForward>,
    loss: f64,
}

fn forward_sample(w: &ModelWeights, sample: &UnrollSample) -> SampleForward {
    let repr_hidden = w.repr_hidden.forward(&sample.observation);
    let repr_state = w.repr_state.forward(&repr_hidden.post);

    let mut steps = Vec::with_capacity(sample.actions.len() + 1);
    let mut loss = 0.0;
    let mut state = repr_state.post.clone();
    for k in 0..=sample.actions.len() {
        let mut dyn_input = None;
        let mut dyn_hidden = None;
        let mut dyn_state = None;
        let mut dyn_reward = None;
        if k > 0 {
            let input = w.dynamics_input(&state, sample.actions[k - 1]);
            let h = w.dyn_hidden.forward(&input);
            let s = w.dyn_state.forward(&h.post);
            let r = w.dyn_reward.forward(&h.post);
            state = s.post.clone();
            loss += (r.post[0] - sample.reward_targets[k - 1]).powi(2);
            dyn_input = Some(input);
            dyn_hidden = Some(h);
            dyn_state = Some(s);
            dyn_reward = Some(r);
        }
        let pred_hidden = w.pred_hidden.forward(&state);
        let policy = w.pred_policy.forward(&pred_hidden.post);
        let value = w.pred_value.forward(&pred_hidden.post);
        loss += (value.post[0] - sample.value_targets[k]).powi(2);
        loss += cross_entropy(&sample.policy_targets[k], &policy.post);
        steps.push(StepForward {
            state: state.clone(),
            pred_hidden,
            policy,
            value,
            dyn_input,
            dyn_hidden,
            dyn_state,
            dyn_reward,
        });
    }
    SampleForward {
        repr_hidden,
        repr_state,
        steps,
        loss,
    }
}

/// Mean unroll loss over a batch.
pub fn loss(w: &ModelWeights, batch: &[UnrollSample]) -> Result<f64> {
    if batch.is_empty() {
        return Err(Error::Usage("empty batch".into()));
    }
    let mut total = 0.0;
    for sample in batch {
        sample.validate(w)?;
        total += forward_sample(w, sample).loss;
    }
    Ok(total / batch.len() as f64)
}

/// Mean loss and its gradients over a batch.
///
/// `dynamics_grad_scale` multiplies the gradient that crosses each unroll
/// boundary into the previous hidden state.
pub fn loss_and_grads(
    w: &ModelWeights,
    batch: &[UnrollSample],
    dynamics_grad_scale: f64,
) -> Result<(f64, ModelGrads)> {
    if batch.is_empty() {
        return Err(Error::Usage("empty batch".into()));
    }
    let inv_b = 1.0 / batch.len() as f64;
    let mut grads = ModelGrads::zeros_like(w);
    let mut total = 0.0;

    // Gradient layer order mirrors ModelWeights::layers().
    const REPR_HIDDEN: usize = 0;
    const REPR_STATE: usize = 1;
    const DYN_HIDDEN: usize = 2;
    const DYN_STATE: usize = 3;
    const DYN_REWARD: usize = 4;
    const PRED_HIDDEN: usize = 5;
    const PRED_POLICY: usize = 6;
    const PRED_VALUE: usize = 7;

    for sample in batch {
        sample.validate(w)?;
        let fwd = forward_sample(w, sample);
        total += fwd.loss;

        let k_max = sample.actions.len();
        // Gradient w.r.t. the hidden state flowing in from step k+1.
        let mut carry = vec![0.0; w.dims.state_dim];
        for k in (0..=k_max).rev() {
            let step = &fwd.steps[k];

            // Prediction heads at step k.
            let dv = 2.0 * (step.value.post[0] - sample.value_targets[k]) * inv_b;
            let mut grad_pred_hidden_out =
                w.pred_value
                    .backward_from_pre(&step.pred_hidden.post, &[dv], &mut grads.layers[PRED_VALUE]);
            let pi = &sample.policy_targets[k];
            let dlogits: Vec<f64> = step
                .policy
                .post
                .iter()
                .zip(pi)
                .map(|(&p, &t)| (p - t) * inv_b)
                .collect();
            let from_policy = w.pred_policy.backward_from_pre(
                &step.pred_hidden.post,
                &dlogits,
                &mut grads.layers[PRED_POLICY],
            );
            for (a, b) in grad_pred_hidden_out.iter_mut().zip(&from_policy) {
                *a += b;
            }
            let mut dstate = w.pred_hidden.backward(
                &step.state,
                &step.pred_hidden,
                &grad_pred_hidden_out,
                &mut grads.layers[PRED_HIDDEN],
            );
            for (a, b) in dstate.iter_mut().zip(&carry) {
                *a += b;
            }

            if k > 0 {
                // Dynamics backward: state head plus reward head.
                let dyn_hidden = step.dyn_hidden.as_ref().unwrap();
                let dyn_state = step.dyn_state.as_ref().unwrap();
                let dyn_reward = step.dyn_reward.as_ref().unwrap();
                let dyn_input = step.dyn_input.as_ref().unwrap();

                let dr = 2.0 * (dyn_reward.post[0] - sample.reward_targets[k - 1]) * inv_b;
                let mut grad_dyn_hidden_out = w.dyn_reward.backward_from_pre(
                    &dyn_hidden.post,
                    &[dr],
                    &mut grads.layers[DYN_REWARD],
                );
                let from_state = w.dyn_state.backward(
                    &dyn_hidden.post,
                    dyn_state,
                    &dstate,
                    &mut grads.layers[DYN_STATE],
                );
                for (a, b) in grad_dyn_hidden_out.iter_mut().zip(&from_state) {
                    *a += b;
                }
                let grad_input = w.dyn_hidden.backward(
                    dyn_input,
                    dyn_hidden,
                    &grad_dyn_hidden_out,
                    &mut grads.layers[DYN_HIDDEN],
                );
                // Only the state part of the input feeds the previous step;
                // the one-hot action part has no parameters upstream.
                carry = grad_input[..w.dims.state_dim]
                    .iter()
                    .map(|g| g * dynamics_grad_scale)
                    .collect();
            } else {
                // Representation backward from the root state gradient.
                let grad_repr_out = w.repr_state.backward(
                    &fwd.repr_hidden.post,
                    &fwd.repr_state,
                    &dstate,
                    &mut grads.layers[REPR_STATE],
                );
                w.repr_hidden.backward(
                    &sample.observation,
                    &fwd.repr_hidden,
                    &grad_repr_out,
                    &mut grads.layers[REPR_HIDDEN],
                );
            }
        }
    }
    Ok((total * inv_b, grads))
}
