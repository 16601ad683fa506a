// Temporary training scout; removed before release.
use specshare_core::scenario::build_scenario;
use specshare_core::training::{TrainHyperparams, Trainer};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let id: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(3);
    let iters: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(15);
    let seed: u64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(1);
    let n: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(0);
    let steps: usize = args.get(5).map(|s| s.parse().unwrap()).unwrap_or(100);
    let buffer: usize = args.get(6).map(|s| s.parse().unwrap()).unwrap_or(500);

    let mut cfg = build_scenario(id).unwrap();
    if n >= 2 {
        cfg.action_count = n;
    }
    let mut hp = TrainHyperparams::default();
    hp.steps_per_iteration = steps;
    hp.buffer_capacity = buffer;
    let mut trainer = Trainer::new(&cfg, hp, seed).unwrap();
    println!("scenario {} N={} seed {seed}", cfg.name, cfg.action_count);
    let t0 = std::time::Instant::now();
    for _ in 0..iters {
        let r = trainer.run_iteration().unwrap();
        println!(
            "iter {:>3}  loss {:>10.4}  eval {:>10.6}  buffer {:>4}  elapsed {:?}",
            r.iteration, r.mean_train_loss, r.eval_score, r.buffer_episodes, t0.elapsed()
        );
    }
}
