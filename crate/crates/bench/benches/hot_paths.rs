use criterion::{criterion_group, criterion_main, Criterion};

use specshare_bench::{scenario, unroll_batch, weights};
use specshare_core::mcts::{run_search, SearchConfig};
use specshare_core::nn::{bptt_step, AdamState, StepOptions};
use specshare_core::radio::RadioEnv;
use specshare_core::rng::rng_from_seed;

fn env_step(c: &mut Criterion) {
    let cfg = scenario();
    c.bench_function("env_full_episode", |b| {
        b.iter(|| {
            let mut env = RadioEnv::new(&cfg, 0).unwrap();
            let mut total = 0.0;
            for p in 0..16 {
                total += env.step(p % 3).unwrap().reward;
            }
            total
        })
    });
}

fn mcts_search(c: &mut Criterion) {
    let cfg = scenario();
    let w = weights(&cfg);
    let env = RadioEnv::new(&cfg, 0).unwrap();
    let obs = env.observation().unwrap().flatten();
    let search = SearchConfig::default();
    c.bench_function("mcts_64_simulations", |b| {
        let mut rng = rng_from_seed(3);
        b.iter(|| run_search(&w, &obs, &search, &mut rng).unwrap().root_value)
    });
}

fn training_step(c: &mut Criterion) {
    let cfg = scenario();
    let mut w = weights(&cfg);
    let batch = unroll_batch(&w, 32);
    let mut adam = AdamState::new(w.param_count(), 1e-4);
    let options = StepOptions::default();
    c.bench_function("bptt_step_batch32", |b| {
        b.iter(|| bptt_step(&mut w, &mut adam, &batch, &options).unwrap())
    });
}

criterion_group!(benches, env_step, mcts_search, training_step);
criterion_main!(benches);
