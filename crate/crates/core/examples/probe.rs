// Temporary diagnostics; removed before release.
use specshare_core::mcts::{run_search, PlanningModel, SearchConfig};
use specshare_core::radio::RadioEnv;
use specshare_core::rng::rng_from_seed;
use specshare_core::scenario::build_scenario;
use specshare_core::training::{TrainHyperparams, Trainer};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let iters: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(10);
    let steps: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(400);

    let cfg = build_scenario(3).unwrap();
    let mut hp = TrainHyperparams::default();
    hp.steps_per_iteration = steps;
    let mut trainer = Trainer::new(&cfg, hp.clone(), 1).unwrap();
    for _ in 0..iters {
        let r = trainer.run_iteration().unwrap();
        eprintln!("iter {} loss {:.3} eval {:.4}", r.iteration, r.mean_train_loss, r.eval_score);
    }

    // Walk the pinned scenario with the trained model, printing the policy
    // head, the value head, per-action dynamics replies and a noiseless
    // search at every subframe, following the greedy action.
    let w = trainer.weights.clone();
    let mut env = RadioEnv::new(&cfg, 0).unwrap();
    let search_cfg = SearchConfig {
        simulations: 64,
        root_noise: false,
        ..SearchConfig::default()
    };
    let mut rng = rng_from_seed(7);
    while !env.is_finished() {
        let p = env.subframe();
        let obs = env.observation().unwrap().flatten();
        let s0 = w.represent(&obs).unwrap();
        let (policy, value) = w.predict(&s0).unwrap();
        let mut line = format!(
            "p={p:>2} buffers=[{:>8.0},{:>8.0}] pol=[{:.3},{:.3}] v={value:>7.3}",
            env.state().queues[0].total_bits(),
            env.state().queues[1].total_bits(),
            policy[0],
            policy[1],
        );
        for a in 0..2 {
            let step = w.step(&s0, a).unwrap();
            line += &format!("  a{a}: r={:+.3} v'={:+.3}", step.reward, step.value);
        }
        let res = run_search(&w, &obs, &search_cfg, &mut rng).unwrap();
        line += &format!("  visits={:?} root_v={:.3}", res.visit_counts, res.root_value);
        println!("{line}");
        let greedy = if policy[0] >= policy[1] { 0 } else { 1 };
        env.step(greedy).unwrap();
    }
}
