//! `specshare oracle`

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde_json::json;
use specshare_core::agents::{oracle_plan, OracleOptions};

use crate::runcfg::scenario_source;

#[derive(Args)]
pub struct OracleArgs {
    /// Pinned scenario id (1-4).
    #[arg(long)]
    pub scenario: Option<usize>,
    /// Scenario file instead of a pinned id.
    #[arg(long, value_name = "PATH")]
    pub scenario_file: Option<PathBuf>,
    /// Override the scenario's action-space size.
    #[arg(long)]
    pub action_count: Option<usize>,
    /// Planning horizon in subframes (defaults to the episode length).
    #[arg(long)]
    pub horizon: Option<usize>,
    /// Expansion budget of the planner.
    #[arg(long, default_value_t = 4_000_000)]
    pub node_budget: usize,
    /// Write the plan as JSON here (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(args: OracleArgs) -> Result<()> {
    let source = scenario_source(args.scenario, args.scenario_file.as_deref())?;
    let mut scenario = source.load()?;
    if let Some(n) = args.action_count {
        scenario.action_count = n;
    }
    scenario.validate()?;
    let horizon = args.horizon.unwrap_or(scenario.episode_length);
    let options = OracleOptions {
        node_budget: args.node_budget,
        ..OracleOptions::default()
    };
    let plan = oracle_plan(&scenario, horizon, &options)?;

    let lte_splits: Vec<usize> = {
        let actions = specshare_core::radio::action_space(
            scenario.action_count,
            scenario.radio.total_prbs,
        )?;
        plan.actions.iter().map(|&a| actions[a].lte_prbs).collect()
    };
    let doc = json!({
        "scenario": scenario.name,
        "action_count": scenario.action_count,
        "horizon": horizon,
        "score": plan.score,
        "actions": plan.actions,
        "lte_prbs_per_subframe": lte_splits,
    });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    match &args.out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}
