//! `specshare train`

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;
use specshare_core::nn::save_checkpoint;
use specshare_core::scenario::write_scenario;
use specshare_core::training::Trainer;

use crate::outputs::{
    checkpoint_name, create_run_dir, scenario_content_hash, JsonLog, ScoreRow, ScoresWriter,
};
use crate::runcfg::{scenario_source, Overrides};

#[derive(Args)]
pub struct TrainArgs {
    /// Pinned scenario id (1-4).
    #[arg(long)]
    pub scenario: Option<usize>,
    /// Scenario file instead of a pinned id.
    #[arg(long, value_name = "PATH")]
    pub scenario_file: Option<PathBuf>,
    /// Override the scenario's action-space size.
    #[arg(long)]
    pub action_count: Option<usize>,
    /// Training iterations to run.
    #[arg(long)]
    pub iterations: usize,
    /// Root seed; every other seed in the run derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory for scores, checkpoints, manifest and log.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Run-config file with `hp.*` / `scenario.*` keys.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Inline override, repeatable: `--set hp.batch_size=32`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    /// Record real wall-clock times in scores.csv. Off by default so a
    /// rerun of the same command is byte-identical.
    #[arg(long)]
    pub wall_clock: bool,
}

pub fn run(args: TrainArgs) -> Result<()> {
    let source = scenario_source(args.scenario, args.scenario_file.as_deref())?;
    let mut scenario = source.load()?;
    if let Some(n) = args.action_count {
        scenario.action_count = n;
    }
    let mut hp = crate::default_hyperparams();
    let overrides = Overrides::from_sources(args.config.as_deref(), &args.sets)?;
    overrides.apply(&mut scenario, &mut hp)?;
    scenario.validate()?;

    let out = create_run_dir(&args.out)?;
    let scenario_text = write_scenario(&scenario);
    std::fs::write(out.join("scenario.cfg"), &scenario_text)?;

    // The manifest holds everything needed to reproduce the run.
    let mut manifest = std::fs::File::create(out.join("manifest.txt"))?;
    writeln!(manifest, "command = train")?;
    writeln!(manifest, "version = {}", env!("CARGO_PKG_VERSION"))?;
    writeln!(manifest, "scenario = {}", source.describe())?;
    writeln!(manifest, "scenario_name = {}", scenario.name)?;
    writeln!(manifest, "scenario_hash = {}", scenario_content_hash(&scenario))?;
    writeln!(manifest, "action_count = {}", scenario.action_count)?;
    writeln!(manifest, "iterations = {}", args.iterations)?;
    writeln!(manifest, "seed = {}", args.seed)?;
    writeln!(manifest, "wall_clock = {}", args.wall_clock)?;
    for (k, v) in overrides.iter() {
        writeln!(manifest, "override.{k} = {v}")?;
    }
    writeln!(manifest, "hp = {}", serde_json::to_string(&hp)?)?;
    manifest.flush()?;

    let mut log = JsonLog::create(&out.join("log.jsonl"))?;
    log.event(json!({
        "event": "run_start",
        "command": "train",
        "scenario": scenario.name,
        "action_count": scenario.action_count,
        "iterations": args.iterations,
        "seed": args.seed,
        "root_noise": hp.root_noise,
    }))?;

    let mut scores = ScoresWriter::create(&out.join("scores.csv"))?;
    let mut trainer = Trainer::new(&scenario, hp, args.seed)?;

    for _ in 0..args.iterations {
        let started = Instant::now();
        let report = trainer.run_iteration()?;
        let elapsed_ms = started.elapsed().as_millis() as u64;
        let wall_ms = if args.wall_clock { elapsed_ms } else { 0 };

        save_checkpoint(
            &out.join(checkpoint_name(report.iteration)),
            &trainer.weights,
        )
        .context("writing checkpoint")?;
        scores.append(&ScoreRow {
            iteration: report.iteration,
            scenario: report.scenario.clone(),
            agent: "muzero".into(),
            seed: args.seed,
            eval_score: report.eval_score,
            train_loss: report.mean_train_loss,
            wall_ms,
        })?;
        log.event(json!({
            "event": "iteration",
            "iteration": report.iteration,
            "eval_score": report.eval_score,
            "train_loss": report.mean_train_loss,
            "buffer_episodes": report.buffer_episodes,
            "elapsed_ms": elapsed_ms,
        }))?;
        eprintln!(
            "iteration {:>3}/{}: eval {:.6}, loss {:.4} ({} ms)",
            report.iteration, args.iterations, report.eval_score, report.mean_train_loss, elapsed_ms
        );
    }

    log.event(json!({"event": "run_end", "status": "ok"}))?;
    Ok(())
}
