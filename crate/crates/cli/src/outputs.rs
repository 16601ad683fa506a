//! Run-directory artifacts: scores.csv, eval.csv, the manifest and the
//! line-delimited JSON log.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};
use specshare_core::scenario::{write_scenario, ScenarioConfig};

/// Versioned column set of `scores.csv`. Readers reject other headers.
pub const SCORES_HEADER: &str = "iteration,scenario,agent,seed,eval_score,train_loss,wall_ms";
/// Versioned column set of `eval.csv`.
pub const EVAL_HEADER: &str = "scenario,agent,seed,score";

/// One `scores.csv` row.
#[derive(Debug, Clone)]
pub struct ScoreRow {
    pub iteration: usize,
    pub scenario: String,
    pub agent: String,
    pub seed: u64,
    pub eval_score: f64,
    pub train_loss: f64,
    pub wall_ms: u64,
}

impl ScoreRow {
    fn to_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.iteration,
            self.scenario,
            self.agent,
            self.seed,
            self.eval_score,
            self.train_loss,
            self.wall_ms
        )
    }
}

pub struct ScoresWriter {
    file: std::fs::File,
}

impl ScoresWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))?;
        writeln!(file, "{SCORES_HEADER}")?;
        Ok(Self { file })
    }

    pub fn append(&mut self, row: &ScoreRow) -> Result<()> {
        writeln!(self.file, "{}", row.to_line())?;
        self.file.flush()?;
        Ok(())
    }
}

pub fn read_scores(path: &Path) -> Result<Vec<ScoreRow>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == SCORES_HEADER => {}
        Some(other) => bail!(
            "unsupported scores.csv column set `{other}` in {}; this build reads `{SCORES_HEADER}`",
            path.display()
        ),
        None => bail!("empty scores file {}", path.display()),
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 7 {
            bail!("{}: line {} has {} fields", path.display(), lineno + 2, parts.len());
        }
        rows.push(ScoreRow {
            iteration: parts[0].parse().context("iteration")?,
            scenario: parts[1].to_string(),
            agent: parts[2].to_string(),
            seed: parts[3].parse().context("seed")?,
            eval_score: parts[4].parse().context("eval_score")?,
            train_loss: parts[5].parse().context("train_loss")?,
            wall_ms: parts[6].parse().context("wall_ms")?,
        });
    }
    Ok(rows)
}

/// Content hash of the resolved scenario; part of the run manifest so a
/// run directory pins exactly what it trained on.
pub fn scenario_content_hash(cfg: &ScenarioConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(write_scenario(cfg).as_bytes());
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for byte in digest {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Line-delimited JSON event log.
pub struct JsonLog {
    file: std::fs::File,
}

impl JsonLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self {
            file: std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?,
        })
    }

    pub fn event(&mut self, value: serde_json::Value) -> Result<()> {
        writeln!(self.file, "{value}")?;
        self.file.flush()?;
        Ok(())
    }
}

/// Creates the run directory, refusing to reuse a non-empty one.
pub fn create_run_dir(path: &Path) -> Result<PathBuf> {
    if path.exists() {
        let occupied = std::fs::read_dir(path)
            .with_context(|| format!("inspecting {}", path.display()))?
            .next()
            .is_some();
        if occupied {
            bail!(
                "output directory {} already exists and is not empty",
                path.display()
            );
        }
    } else {
        std::fs::create_dir_all(path)
            .with_context(|| format!("creating {}", path.display()))?;
    }
    Ok(path.to_path_buf())
}

pub fn checkpoint_name(iteration: usize) -> String {
    format!("checkpoint_{iteration:04}.bin")
}
