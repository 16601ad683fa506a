//! `specshare eval`

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use specshare_core::agents::{
    evaluate_agent, Agent, AlternatingAgent, EqualSplitAgent, MuZeroAgent, OracleAgent,
    ProportionalAgent,
};
use specshare_core::nn::load_checkpoint;

use crate::outputs::EVAL_HEADER;
use crate::runcfg::{parse_seed_list, scenario_source};

#[derive(Args)]
pub struct EvalArgs {
    /// Trained model checkpoint.
    #[arg(long, value_name = "PATH")]
    pub checkpoint: PathBuf,
    /// Pinned scenario id (1-4).
    #[arg(long)]
    pub scenario: Option<usize>,
    /// Scenario file instead of a pinned id.
    #[arg(long, value_name = "PATH")]
    pub scenario_file: Option<PathBuf>,
    /// Override the scenario's action-space size.
    #[arg(long)]
    pub action_count: Option<usize>,
    /// Comma-separated evaluation seeds.
    #[arg(long, default_value = "0")]
    pub seeds: String,
    /// Agents to evaluate.
    #[arg(
        long,
        default_value = "muzero,proportional,equal,alternating,oracle",
        value_name = "LIST"
    )]
    pub agents: String,
    /// Where to write eval.csv (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let source = scenario_source(args.scenario, args.scenario_file.as_deref())?;
    let mut scenario = source.load()?;
    if let Some(n) = args.action_count {
        scenario.action_count = n;
    }
    scenario.validate()?;
    let seeds = parse_seed_list(&args.seeds)?;

    let weights = load_checkpoint(&args.checkpoint)
        .with_context(|| format!("loading checkpoint {}", args.checkpoint.display()))?;
    if weights.dims.obs_dim != scenario.observation_dim()
        || weights.dims.action_count != scenario.action_count
    {
        bail!(
            "checkpoint was trained for obs_dim {} / {} actions; the scenario needs {} / {}",
            weights.dims.obs_dim,
            weights.dims.action_count,
            scenario.observation_dim(),
            scenario.action_count
        );
    }

    let mut lines = vec![EVAL_HEADER.to_string()];
    for name in args.agents.split(',').map(str::trim) {
        if name == "muzero" {
            let mut agent = MuZeroAgent::new(weights.clone());
            let stats = evaluate_agent(&mut agent, &scenario, &seeds)?;
            for (seed, score) in &stats.scores {
                lines.push(format!("{},muzero,{},{}", scenario.name, seed, score));
            }
            // The execution-phase contract: evaluating the trained agent
            // must run zero dynamics calls and zero searches.
            let c = agent.counters();
            eprintln!(
                "muzero calls: represent={} predict={} dynamics={} searches={}",
                c.represent.get(),
                c.predict.get(),
                c.dynamics.get(),
                c.searches.get()
            );
            if c.dynamics.get() != 0 || c.searches.get() != 0 {
                bail!(
                    "execution-phase contract violated: {} dynamics calls, {} searches",
                    c.dynamics.get(),
                    c.searches.get()
                );
            }
            continue;
        }
        let mut agent: Box<dyn Agent> = match name {
            "proportional" => Box::new(ProportionalAgent),
            "equal" => Box::new(EqualSplitAgent),
            "alternating" => Box::new(AlternatingAgent::default()),
            "alternating-lte-first" => Box::new(AlternatingAgent { nr_first: false }),
            "oracle" => Box::new(OracleAgent::for_scenario(&scenario)?),
            other => bail!("unknown agent `{other}`"),
        };
        let stats = evaluate_agent(agent.as_mut(), &scenario, &seeds)?;
        for (seed, score) in &stats.scores {
            lines.push(format!("{},{},{},{}", scenario.name, agent.name(), seed, score));
        }
    }

    let text = lines.join("\n") + "\n";
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}
