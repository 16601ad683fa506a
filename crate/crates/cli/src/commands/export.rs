//! `specshare export-plot-data`

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;

use crate::outputs::read_scores;

/// Reference line of the study plots: the score of a perfectly solved
/// 16-subframe episode.
pub const REFERENCE_SCORE: f64 = 16.0;

#[derive(Args)]
pub struct ExportArgs {
    /// Run directories containing scores.csv; repeatable. Seeds from
    /// multiple runs of one scenario merge into one table.
    #[arg(long = "run-dir", value_name = "DIR", required = true)]
    pub run_dirs: Vec<PathBuf>,
    /// Output directory for the per-scenario plot files.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
}

pub fn run(args: ExportArgs) -> Result<()> {
    // scenario -> (iteration, agent) -> seed -> score
    let mut tables: BTreeMap<String, BTreeMap<(usize, String), BTreeMap<u64, f64>>> =
        BTreeMap::new();
    let mut seeds_per_scenario: BTreeMap<String, BTreeSet<u64>> = BTreeMap::new();

    for dir in &args.run_dirs {
        let path = dir.join("scores.csv");
        let rows = read_scores(&path).with_context(|| format!("loading {}", path.display()))?;
        for row in rows {
            seeds_per_scenario
                .entry(row.scenario.clone())
                .or_default()
                .insert(row.seed);
            let prev = tables
                .entry(row.scenario.clone())
                .or_default()
                .entry((row.iteration, row.agent.clone()))
                .or_default()
                .insert(row.seed, row.eval_score);
            if prev.is_some() {
                bail!(
                    "duplicate series: scenario {} iteration {} agent {} seed {} appears twice",
                    row.scenario,
                    row.iteration,
                    row.agent,
                    row.seed
                );
            }
        }
    }
    if tables.is_empty() {
        bail!("no score rows found in the given run directories");
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    for (scenario, table) in &tables {
        let seeds: Vec<u64> = seeds_per_scenario[scenario].iter().copied().collect();
        let mut text = String::from("iteration,agent,median_score,reference");
        for seed in &seeds {
            text.push_str(&format!(",score_seed_{seed}"));
        }
        text.push('\n');
        for ((iteration, agent), by_seed) in table {
            let mut present: Vec<f64> = by_seed.values().copied().collect();
            present.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let median = if present.len() % 2 == 1 {
                present[present.len() / 2]
            } else {
                0.5 * (present[present.len() / 2 - 1] + present[present.len() / 2])
            };
            text.push_str(&format!("{iteration},{agent},{median},{REFERENCE_SCORE}"));
            for seed in &seeds {
                match by_seed.get(seed) {
                    Some(score) => text.push_str(&format!(",{score}")),
                    None => text.push(','),
                }
            }
            text.push('\n');
        }
        let path = args.out.join(format!("plot_{scenario}.csv"));
        std::fs::write(&path, text)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}
