// Temporary scouting harness; removed before release.
use specshare_core::agents::*;
use specshare_core::scenario::*;

fn main() {
    for id in 1..=4 {
        let cfg = build_scenario(id).unwrap();
        let t0 = std::time::Instant::now();
        let plan = oracle_plan(&cfg, cfg.episode_length, &OracleOptions::default()).unwrap();
        let dt = t0.elapsed();
        println!(
            "scenario {id} (N={}): oracle score {:.9} in {:?}, plan {:?}",
            cfg.action_count, plan.score, dt, plan.actions
        );
        for (name, agent) in baselines() {
            let mut agent = agent;
            let stats = evaluate_agent(agent.as_mut(), &cfg, &[0]).unwrap();
            println!("  {name:<22} {:.9}", stats.scores[0].1);
        }
    }

    // Variants used by the acceptance criteria.
    for (id, n) in [(2usize, 3usize), (4, 4)] {
        let mut cfg = build_scenario(id).unwrap();
        cfg.action_count = n;
        let plan = oracle_plan(&cfg, cfg.episode_length, &OracleOptions::default()).unwrap();
        println!("scenario {id} with N={n}: oracle {:.9} plan {:?}", plan.score, plan.actions);
        for (name, agent) in baselines() {
            let mut agent = agent;
            let stats = evaluate_agent(agent.as_mut(), &cfg, &[0]).unwrap();
            println!("  {name:<22} {:.9}", stats.scores[0].1);
        }
    }

    // Optimal sequence counts for the strategy checks.
    for (id, n, horizon) in [(1usize, 3usize, 8usize), (2, 2, 16), (3, 2, 16), (4, 3, 16), (4, 4, 16), (4, 3, 8)] {
        let mut cfg = build_scenario(id).unwrap();
        cfg.action_count = n;
        let t0 = std::time::Instant::now();
        match oracle_optimal_sequences(&cfg, horizon, &OracleOptions::default()) {
            Ok((best, seqs)) => println!(
                "scenario {id} N={n} h={horizon}: best {best:.9}, {} optimal sequences ({:?})",
                seqs.len(),
                t0.elapsed()
            ),
            Err(e) => println!("scenario {id} N={n} h={horizon}: {e}"),
        }
    }
}

fn baselines() -> Vec<(&'static str, Box<dyn Agent>)> {
    vec![
        ("proportional", Box::new(ProportionalAgent)),
        ("equal", Box::new(EqualSplitAgent)),
        ("alternating", Box::new(AlternatingAgent::default())),
        (
            "alternating-lte-first",
            Box::new(AlternatingAgent { nr_first: false }),
        ),
    ]
}
