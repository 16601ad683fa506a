//! Shared fixtures for the benchmarks.

use specshare_core::nn::{ModelDims, ModelWeights, UnrollSample};
use specshare_core::rng::rng_from_seed;
use specshare_core::scenario::{build_scenario, ScenarioConfig};

pub fn scenario() -> ScenarioConfig {
    build_scenario(1).expect("pinned scenario")
}

pub fn weights(cfg: &ScenarioConfig) -> ModelWeights {
    let dims = ModelDims::new(cfg.observation_dim(), cfg.action_count, cfg.window);
    let mut rng = rng_from_seed(42);
    ModelWeights::init(dims, &mut rng)
}

pub fn unroll_batch(weights: &ModelWeights, size: usize) -> Vec<UnrollSample> {
    use rand::Rng;
    let mut rng = rng_from_seed(7);
    let n = weights.dims.action_count;
    (0..size)
        .map(|_| {
            let k = 3;
            UnrollSample {
                observation: (0..weights.dims.obs_dim).map(|_| rng.gen_range(0.0..1.0)).collect(),
                actions: (0..k).map(|_| rng.gen_range(0..n)).collect(),
                policy_targets: (0..=k).map(|_| vec![1.0 / n as f64; n]).collect(),
                value_targets: (0..=k).map(|_| rng.gen_range(0.0..16.0)).collect(),
                reward_targets: (0..k).map(|_| rng.gen_range(0.0..1.0)).collect(),
            }
        })
        .collect()
}
