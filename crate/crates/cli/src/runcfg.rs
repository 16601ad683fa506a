//! Run configuration: defaults, optional config file, CLI overrides.
//!
//! Config files use the same flat `key = value` format as scenario files.
//! Precedence is CLI `--set` over file over defaults. Keys:
//!
//! * `hp.<field>` — any training hyperparameter, e.g. `hp.batch_size = 32`
//! * `scenario.<key>` — any scenario key, e.g. `scenario.user.0.packet_bits`

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use specshare_core::scenario::{
    apply_scenario_override, build_scenario, parse_scenario, ScenarioConfig,
};
use specshare_core::training::TrainHyperparams;

/// Where the scenario comes from: a pinned id or a scenario file.
#[derive(Debug, Clone)]
pub enum ScenarioSource {
    Id(usize),
    File(std::path::PathBuf),
}

impl ScenarioSource {
    pub fn load(&self) -> Result<ScenarioConfig> {
        match self {
            ScenarioSource::Id(id) => Ok(build_scenario(*id)?),
            ScenarioSource::File(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading scenario file {}", path.display()))?;
                Ok(parse_scenario(&text)?)
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ScenarioSource::Id(id) => id.to_string(),
            ScenarioSource::File(path) => format!("file:{}", path.display()),
        }
    }
}

pub fn scenario_source(id: Option<usize>, file: Option<&Path>) -> Result<ScenarioSource> {
    match (id, file) {
        (Some(_), Some(_)) => bail!("--scenario and --scenario-file are mutually exclusive"),
        (Some(id), None) => Ok(ScenarioSource::Id(id)),
        (None, Some(f)) => Ok(ScenarioSource::File(f.to_path_buf())),
        (None, None) => bail!("one of --scenario or --scenario-file is required"),
    }
}

/// Flat key-value overrides collected from a config file and `--set`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    entries: BTreeMap<String, String>,
}

impl Overrides {
    pub fn from_sources(config_file: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut entries = BTreeMap::new();
        if let Some(path) = config_file {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .with_context(|| format!("config line {}: expected key = value", lineno + 1))?;
                entries.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        // CLI --set wins over the file.
        for s in sets {
            let (k, v) = s
                .split_once('=')
                .with_context(|| format!("--set {s}: expected key=value"))?;
            entries.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Applies `scenario.*` keys to the scenario and `hp.*` keys to the
    /// hyperparameters; rejects anything else.
    pub fn apply(
        &self,
        scenario: &mut ScenarioConfig,
        hp: &mut TrainHyperparams,
    ) -> Result<()> {
        for (key, value) in self.iter() {
            if let Some(rest) = key.strip_prefix("scenario.") {
                *scenario = apply_scenario_override(scenario, rest, value)?;
            } else if let Some(rest) = key.strip_prefix("hp.") {
                apply_hp_override(hp, rest, value)?;
            } else {
                bail!("unknown override key `{key}` (expected scenario.* or hp.*)");
            }
        }
        Ok(())
    }
}

fn apply_hp_override(hp: &mut TrainHyperparams, key: &str, value: &str) -> Result<()> {
    macro_rules! set {
        ($field:ident) => {{
            hp.$field = value
                .parse()
                .with_context(|| format!("hp.{key}: cannot parse `{value}`"))?;
        }};
    }
    match key {
        "episodes_per_iteration" => set!(episodes_per_iteration),
        "mcts_simulations" => set!(mcts_simulations),
        "steps_per_iteration" => set!(steps_per_iteration),
        "batch_size" => set!(batch_size),
        "unroll_steps" => set!(unroll_steps),
        "td_steps" => set!(td_steps),
        "discount" => set!(discount),
        "learning_rate" => set!(learning_rate),
        "buffer_capacity" => set!(buffer_capacity),
        "temperature" => set!(temperature),
        "root_noise" => set!(root_noise),
        "dynamics_grad_scale" => set!(dynamics_grad_scale),
        "max_grad_norm" => set!(max_grad_norm),
        other => bail!("unknown hyperparameter `hp.{other}`"),
    }
    Ok(())
}

pub fn parse_seed_list(raw: &str) -> Result<Vec<u64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed `{s}`"))
        })
        .collect()
}
