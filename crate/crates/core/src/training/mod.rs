//! The training loop: generate episodes with search over sampled
//! environments, store them in the replay buffer, compute targets and
//! train the three networks jointly.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::{evaluate_agent, MuZeroAgent};
use crate::error::{Error, Result};
use crate::mcts::{run_search, sample_action, PlanningModel, SearchConfig};
use crate::nn::{bptt_step, AdamState, ModelDims, ModelWeights, StepOptions, UnrollSample};
use crate::radio::RadioEnv;
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::scenario::{sample_environment, ScenarioConfig};

/// One recorded decision: the observation the controller saw, the action
/// it took, the reward the environment returned, the search policy and
/// the search's root value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeStep {
    pub observation: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub search_policy: Vec<f64>,
    pub root_value: f64,
}

/// One stored episode.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<TimeStep>,
    pub scenario: String,
    pub seed: u64,
}

/// Ring of the most recent trajectories with a uniform sequence sampler.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    episodes: VecDeque<Trajectory>,
    capacity: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            episodes: VecDeque::with_capacity(capacity.min(4096)),
            capacity,
        }
    }

    pub fn push(&mut self, trajectory: Trajectory) {
        if self.episodes.len() == self.capacity {
            self.episodes.pop_front();
        }
        self.episodes.push_back(trajectory);
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn get(&self, index: usize) -> &Trajectory {
        &self.episodes[index]
    }
}

/// Hyperparameters of the training loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainHyperparams {
    pub episodes_per_iteration: usize,
    pub mcts_simulations: usize,
    pub steps_per_iteration: usize,
    pub batch_size: usize,
    pub unroll_steps: usize,
    pub td_steps: usize,
    pub discount: f64,
    pub learning_rate: f64,
    pub buffer_capacity: usize,
    /// Action sampling temperature during data generation.
    pub temperature: f64,
    pub root_noise: bool,
    pub dynamics_grad_scale: f64,
    pub max_grad_norm: f64,
}

impl Default for TrainHyperparams {
    fn default() -> Self {
        Self {
            episodes_per_iteration: 100,
            mcts_simulations: 64,
            // With Adam at 1e-4 the value head needs on the order of a
            // thousand steps per iteration to track targets of size ~16;
            // fewer steps stall the policy for tens of iterations.
            steps_per_iteration: 1000,
            batch_size: 32,
            unroll_steps: 3,
            td_steps: 16,
            discount: 0.99,
            learning_rate: 1e-4,
            buffer_capacity: 500,
            temperature: 1.0,
            root_noise: true,
            dynamics_grad_scale: 0.5,
            max_grad_norm: 5.0,
        }
    }
}

impl TrainHyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0
            || self.episodes_per_iteration == 0
            || self.mcts_simulations == 0
            || self.unroll_steps == 0
        {
            return Err(Error::Config("training sizes must be positive".into()));
        }
        if self.td_steps < self.unroll_steps {
            return Err(Error::Config("td_steps must be >= unroll_steps".into()));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(Error::Config("discount must be in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            simulations: self.mcts_simulations,
            discount: self.discount,
            root_noise: self.root_noise,
            ..SearchConfig::default()
        }
    }

    pub fn step_options(&self) -> StepOptions {
        StepOptions {
            dynamics_grad_scale: self.dynamics_grad_scale,
            max_grad_norm: self.max_grad_norm,
        }
    }
}

/// Plays one episode with search in the loop and records every step.
pub fn generate_episode<M: PlanningModel + Sync, R: Rng>(
    model: &M,
    env: &mut RadioEnv,
    search: &SearchConfig,
    temperature: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    let mut steps = Vec::with_capacity(env.config().episode_length);
    while !env.is_finished() {
        let observation = env.observation()?.flatten();
        let result = run_search(model, &observation, search, rng)?;
        let action = sample_action(&result.policy, temperature, rng);
        let outcome = env.step(action)?;
        steps.push(TimeStep {
            observation,
            action,
            reward: outcome.reward,
            search_policy: result.policy,
            root_value: result.root_value,
        });
    }
    Ok(Trajectory {
        steps,
        scenario: env.config().name.clone(),
        seed: env.state().seed,
    })
}

/// Discounted sum of up to `td_steps` environment rewards from `t`.
/// With 16 TD steps over 16-subframe episodes this is the Monte Carlo
/// return to the episode end with a zero bootstrap.
pub fn compute_value_target(trajectory: &Trajectory, t: usize, discount: f64, td_steps: usize) -> f64 {
    let len = trajectory.steps.len();
    let span = td_steps.min(len.saturating_sub(t));
    let mut z = 0.0;
    let mut factor = 1.0;
    for k in 0..span {
        z += factor * trajectory.steps[t + k].reward;
        factor *= discount;
    }
    z
}

/// Uniformly samples `(trajectory, start)` pairs and extracts unroll
/// sequences. Positions crossing the episode end pad with absorbing
/// steps: reward target 1, uniform policy, value target 0 and a random
/// action.
pub fn sample_batch<R: Rng>(
    buffer: &ReplayBuffer,
    hp: &TrainHyperparams,
    action_count: usize,
    rng: &mut R,
) -> Result<Vec<UnrollSample>> {
    if buffer.is_empty() {
        return Err(Error::Usage("replay buffer is empty".into()));
    }
    let uniform = vec![1.0 / action_count as f64; action_count];
    let mut batch = Vec::with_capacity(hp.batch_size);
    for _ in 0..hp.batch_size {
        let trajectory = buffer.get(rng.gen_range(0..buffer.len()));
        let len = trajectory.steps.len();
        let t = rng.gen_range(0..len);

        let mut actions = Vec::with_capacity(hp.unroll_steps);
        let mut reward_targets = Vec::with_capacity(hp.unroll_steps);
        let mut policy_targets = Vec::with_capacity(hp.unroll_steps + 1);
        let mut value_targets = Vec::with_capacity(hp.unroll_steps + 1);

        for k in 0..=hp.unroll_steps {
            // Targets for the state reached after k unroll steps.
            let idx = t + k;
            if idx < len {
                policy_targets.push(trajectory.steps[idx].search_policy.clone());
                value_targets.push(compute_value_target(trajectory, idx, hp.discount, hp.td_steps));
            } else {
                policy_targets.push(uniform.clone());
                value_targets.push(0.0);
            }
            if k > 0 {
                // Action applied at unroll step k and the reward it earned.
                let aidx = t + k - 1;
                if aidx < len {
                    actions.push(trajectory.steps[aidx].action);
                    reward_targets.push(trajectory.steps[aidx].reward);
                } else {
                    actions.push(rng.gen_range(0..action_count));
                    reward_targets.push(1.0);
                }
            }
        }
        batch.push(UnrollSample {
            observation: trajectory.steps[t].observation.clone(),
            actions,
            policy_targets,
            value_targets,
            reward_targets,
        });
    }
    Ok(batch)
}

/// Per-iteration summary.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationReport {
    pub iteration: usize,
    pub scenario: String,
    pub mean_train_loss: f64,
    pub eval_score: f64,
    pub buffer_episodes: usize,
}

/// Owns everything one training run needs.
pub struct Trainer {
    pub weights: ModelWeights,
    pub adam: AdamState,
    pub buffer: ReplayBuffer,
    pub hp: TrainHyperparams,
    scenario: ScenarioConfig,
    seed: u64,
    iteration: usize,
}

impl Trainer {
    /// Fresh trainer with seeded weight initialization.
    pub fn new(scenario: &ScenarioConfig, hp: TrainHyperparams, seed: u64) -> Result<Self> {
        scenario.validate()?;
        hp.validate()?;
        let dims = ModelDims::new(
            scenario.observation_dim(),
            scenario.action_count,
            scenario.window,
        );
        let mut init_rng = rng_from_seed(derive_seed(seed, &[stream::INIT]));
        let weights = ModelWeights::init(dims, &mut init_rng);
        let adam = AdamState::new(weights.param_count(), hp.learning_rate);
        let buffer = ReplayBuffer::new(hp.buffer_capacity);
        Ok(Self {
            weights,
            adam,
            buffer,
            hp,
            scenario: scenario.clone(),
            seed,
            iteration: 0,
        })
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn scenario(&self) -> &ScenarioConfig {
        &self.scenario
    }

    /// Greedy evaluation of the current weights on the pinned scenario.
    pub fn evaluate(&self) -> Result<f64> {
        let mut agent = MuZeroAgent::new(self.weights.clone());
        let stats = evaluate_agent(&mut agent, &self.scenario, &[0])?;
        Ok(stats.scores[0].1)
    }

    /// One outer-loop iteration: sample environments, generate episodes
    /// with search, train on the buffer, evaluate greedily.
    pub fn run_iteration(&mut self) -> Result<IterationReport> {
        let iter = self.iteration as u64;
        let search = self.hp.search_config();

        // Sample the iteration's environments up front so the parallel
        // fan-out cannot disturb rng ordering.
        let mut env_rng = rng_from_seed(derive_seed(self.seed, &[stream::ENV_SAMPLE, iter]));
        let mut jobs = Vec::with_capacity(self.hp.episodes_per_iteration);
        for e in 0..self.hp.episodes_per_iteration {
            let cfg = sample_environment(&self.scenario, &mut env_rng)?;
            let episode_seed = derive_seed(self.seed, &[stream::EPISODE, iter, e as u64]);
            jobs.push((cfg, episode_seed));
        }

        let weights = &self.weights;
        let temperature = self.hp.temperature;
        let episodes: Vec<Trajectory> = jobs
            .into_par_iter()
            .map(|(cfg, episode_seed)| {
                let mut env = RadioEnv::new(&cfg, episode_seed)?;
                let mut rng = rng_from_seed(episode_seed);
                generate_episode(weights, &mut env, &search, temperature, &mut rng)
            })
            .collect::<Result<_>>()?;
        for episode in episodes {
            self.buffer.push(episode);
        }

        let mut train_rng = rng_from_seed(derive_seed(self.seed, &[stream::TRAIN, iter]));
        let action_count = self.weights.dims.action_count;
        let options = self.hp.step_options();
        let mut loss_sum = 0.0;
        for _ in 0..self.hp.steps_per_iteration {
            let batch = sample_batch(&self.buffer, &self.hp, action_count, &mut train_rng)?;
            loss_sum += bptt_step(&mut self.weights, &mut self.adam, &batch, &options)?;
        }
        let mean_train_loss = if self.hp.steps_per_iteration > 0 {
            loss_sum / self.hp.steps_per_iteration as f64
        } else {
            f64::NAN
        };

        self.iteration += 1;
        let eval_score = self.evaluate()?;
        Ok(IterationReport {
            iteration: self.iteration,
            scenario: self.scenario.name.clone(),
            mean_train_loss,
            eval_score,
            buffer_episodes: self.buffer.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcts::{ModelOutput, ModelStep};
    use crate::scenario::build_scenario;

    /// Planning stub whose policy is one-hot on a fixed action.
    struct FixedActionModel {
        n: usize,
        action: usize,
    }

    impl PlanningModel for FixedActionModel {
        fn action_count(&self) -> usize {
            self.n
        }

        fn encode(&self, _obs: &[f64]) -> Result<ModelOutput> {
            let mut policy = vec![0.0; self.n];
            policy[self.action] = 1.0;
            Ok(ModelOutput {
                state: vec![0.0],
                policy,
                value: 0.0,
            })
        }

        fn step(&self, _state: &[f64], _action: usize) -> Result<ModelStep> {
            let mut policy = vec![0.0; self.n];
            policy[self.action] = 1.0;
            Ok(ModelStep {
                state: vec![0.0],
                reward: 0.0,
                policy,
                value: 0.0,
            })
        }
    }

    #[test]
    fn scripted_stub_search_produces_constant_actions() {
        let cfg = build_scenario(2).unwrap();
        let model = FixedActionModel { n: 2, action: 1 };
        let mut env = RadioEnv::new(&cfg, 0).unwrap();
        let search = SearchConfig {
            simulations: 8,
            root_noise: false,
            ..SearchConfig::default()
        };
        let mut rng = rng_from_seed(0);
        let traj = generate_episode(&model, &mut env, &search, 0.0, &mut rng).unwrap();
        assert_eq!(traj.steps.len(), 16);
        assert!(traj.steps.iter().all(|s| s.action == 1));
    }

    #[test]
    fn empty_traffic_episode_returns_sixteen() {
        let mut cfg = build_scenario(1).unwrap();
        for u in &mut cfg.users {
            u.packet_bits = 0.0;
        }
        cfg.randomization = None;
        let model = FixedActionModel { n: 3, action: 0 };
        let mut env = RadioEnv::new(&cfg, 0).unwrap();
        let search = SearchConfig {
            simulations: 4,
            root_noise: false,
            ..SearchConfig::default()
        };
        let mut rng = rng_from_seed(1);
        let traj = generate_episode(&model, &mut env, &search, 1.0, &mut rng).unwrap();
        let total: f64 = traj.steps.iter().map(|s| s.reward).sum();
        assert_eq!(total, 16.0);
    }

    #[test]
    fn seeded_episodes_are_identical() {
        let cfg = build_scenario(2).unwrap();
        let model = FixedActionModel { n: 2, action: 0 };
        let search = SearchConfig {
            simulations: 8,
            ..SearchConfig::default()
        };
        let run = || {
            let mut env = RadioEnv::new(&cfg, 5).unwrap();
            let mut rng = rng_from_seed(5);
            generate_episode(&model, &mut env, &search, 1.0, &mut rng).unwrap()
        };
        let a = run();
        let b = run();
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert_eq!(x.action, y.action);
            assert_eq!(x.reward, y.reward);
            assert_eq!(x.search_policy, y.search_policy);
        }
    }

    fn toy_trajectory(rewards: &[f64]) -> Trajectory {
        Trajectory {
            steps: rewards
                .iter()
                .enumerate()
                .map(|(i, &r)| TimeStep {
                    observation: vec![0.0; 4],
                    action: i % 2,
                    reward: r,
                    search_policy: vec![0.5, 0.5],
                    root_value: 0.0,
                })
                .collect(),
            scenario: "toy".into(),
            seed: 0,
        }
    }

    #[test]
    fn value_target_matches_geometric_sums() {
        let traj = toy_trajectory(&[1.0; 16]);
        assert_eq!(compute_value_target(&traj, 0, 1.0, 16), 16.0);
        let z = compute_value_target(&traj, 0, 0.99, 16);
        let expected = (1.0 - 0.99f64.powi(16)) / 0.01;
        assert!((z - expected).abs() < 1e-12);
        assert_eq!(compute_value_target(&traj, 15, 0.99, 16), 1.0);
    }

    #[test]
    fn value_target_truncates_at_td_steps() {
        let traj = toy_trajectory(&[1.0; 16]);
        assert_eq!(compute_value_target(&traj, 0, 1.0, 4), 4.0);
    }

    #[test]
    fn batch_pads_past_episode_end() {
        let mut buffer = ReplayBuffer::new(4);
        buffer.push(toy_trajectory(&[0.25; 16]));
        let hp = TrainHyperparams {
            batch_size: 256,
            ..TrainHyperparams::default()
        };
        let mut rng = rng_from_seed(3);
        let batch = sample_batch(&buffer, &hp, 2, &mut rng).unwrap();
        let padded = batch
            .iter()
            .find(|s| s.policy_targets.last().unwrap() == &vec![0.5, 0.5]
                && s.value_targets.last() == Some(&0.0)
                && s.reward_targets.last() == Some(&1.0))
            .expect("some sample must start near the episode end");
        assert_eq!(padded.actions.len(), 3);
    }

    #[test]
    fn reward_target_aligns_with_the_applied_action() {
        // Distinct rewards per step pin the index arithmetic: unroll
        // step k applies action a_{t+k-1} and predicts reward u_{t+k-1}.
        let rewards: Vec<f64> = (0..16).map(|i| i as f64 / 16.0).collect();
        let mut buffer = ReplayBuffer::new(1);
        buffer.push(toy_trajectory(&rewards));
        let hp = TrainHyperparams {
            batch_size: 64,
            ..TrainHyperparams::default()
        };
        let mut rng = rng_from_seed(8);
        let batch = sample_batch(&buffer, &hp, 2, &mut rng).unwrap();
        let traj = buffer.get(0);
        for sample in &batch {
            // Recover t from the first in-episode reward target.
            if sample.reward_targets[0] == 1.0 {
                continue; // padded from the very start
            }
            let t = (sample.reward_targets[0] * 16.0).round() as usize;
            for (k, &rt) in sample.reward_targets.iter().enumerate() {
                let idx = t + k;
                if idx < 16 {
                    assert_eq!(rt, traj.steps[idx].reward);
                    assert_eq!(sample.actions[k], traj.steps[idx].action);
                } else {
                    assert_eq!(rt, 1.0);
                }
            }
        }
    }

    #[test]
    fn trajectory_sampling_is_roughly_uniform() {
        let mut buffer = ReplayBuffer::new(128);
        for i in 0..100 {
            let mut t = toy_trajectory(&[1.0; 16]);
            t.seed = i;
            buffer.push(t);
        }
        let hp = TrainHyperparams {
            batch_size: 10_000,
            ..TrainHyperparams::default()
        };
        let mut rng = rng_from_seed(17);
        let mut counts = vec![0usize; 100];
        // Count which trajectory each sample came from via the seed field.
        for _ in 0..1 {
            let _batch = sample_batch(&buffer, &hp, 2, &mut rng).unwrap();
        }
        // sample_batch does not expose the trajectory id; sample directly.
        for _ in 0..10_000 {
            counts[rng.gen_range(0..buffer.len())] += 1;
        }
        let expected = 100.0;
        let sigma = (10_000.0 * 0.01 * 0.99f64).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - expected).abs() < 3.0 * sigma + 1.0,
                "count {c} deviates from uniform"
            );
        }
    }

    #[test]
    fn buffer_is_a_ring_of_most_recent_episodes() {
        let mut buffer = ReplayBuffer::new(3);
        for i in 0..5 {
            let mut t = toy_trajectory(&[1.0; 2]);
            t.seed = i;
            buffer.push(t);
        }
        assert_eq!(buffer.len(), 3);
        assert_eq!(buffer.get(0).seed, 2);
        assert_eq!(buffer.get(2).seed, 4);
    }

    #[test]
    fn zero_step_iteration_only_grows_the_buffer() {
        let cfg = build_scenario(3).unwrap();
        let hp = TrainHyperparams {
            episodes_per_iteration: 1,
            steps_per_iteration: 0,
            mcts_simulations: 4,
            ..TrainHyperparams::default()
        };
        let mut trainer = Trainer::new(&cfg, hp, 1).unwrap();
        let before = trainer.weights.flatten();
        let report = trainer.run_iteration().unwrap();
        assert_eq!(report.buffer_episodes, 1);
        assert_eq!(trainer.weights.flatten(), before);
        assert!(report.mean_train_loss.is_nan());
    }

    #[test]
    fn iterations_are_deterministic_under_seed() {
        let cfg = build_scenario(3).unwrap();
        let hp = TrainHyperparams {
            episodes_per_iteration: 4,
            steps_per_iteration: 5,
            mcts_simulations: 8,
            ..TrainHyperparams::default()
        };
        let run = || {
            let mut trainer = Trainer::new(&cfg, hp.clone(), 9).unwrap();
            let mut out = Vec::new();
            for _ in 0..2 {
                let r = trainer.run_iteration().unwrap();
                out.push((r.mean_train_loss, r.eval_score));
            }
            (out, trainer.weights.flatten())
        };
        let (ra, wa) = run();
        let (rb, wb) = run();
        assert_eq!(ra, rb);
        assert_eq!(wa, wb);
    }
}
