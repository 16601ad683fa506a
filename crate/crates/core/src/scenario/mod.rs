//! Scenario configurations: the four pinned reproduction studies and the
//! randomized environment sampler used for training data generation.

mod builders;
mod file;

pub use builders::build_scenario;
pub use file::{apply_scenario_override, parse_scenario, write_scenario, SCENARIO_SCHEMA};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radio::{CapacityOverride, RadioParams, UserConfig};

/// Repeating MBSFN configuration: subframe `p` is MBSFN iff
/// `mbsfn[p % period]` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MbsfnPattern {
    pub period: usize,
    pub mbsfn: Vec<bool>,
}

impl MbsfnPattern {
    pub fn is_mbsfn(&self, subframe: usize) -> bool {
        self.mbsfn[subframe % self.period]
    }

    pub fn validate(&self) -> Result<()> {
        if self.period < 1 {
            return Err(Error::Config("mbsfn period must be >= 1".into()));
        }
        if self.mbsfn.len() != self.period {
            return Err(Error::Config(format!(
                "mbsfn pattern length {} does not match period {}",
                self.mbsfn.len(),
                self.period
            )));
        }
        Ok(())
    }
}

/// Periodic high interference on one user: subframe `p` is interfered iff
/// `p % period == phase`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceEntry {
    pub user_id: usize,
    pub period: usize,
    pub phase: usize,
}

impl InterferenceEntry {
    pub fn is_interfered(&self, subframe: usize) -> bool {
        subframe % self.period == self.phase
    }
}

/// Per-user uniform sampling ranges for training environments.
/// `min == max` pins the value to the base scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRanges {
    pub packet_bits: (f64, f64),
    pub first_arrival: (usize, usize),
    pub distance_m: (f64, f64),
}

/// Randomization applied by [`sample_environment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomizationSpec {
    /// Parallel to `ScenarioConfig::users`.
    pub users: Vec<UserRanges>,
}

impl RandomizationSpec {
    pub fn validate(&self, users: usize) -> Result<()> {
        if self.users.len() != users {
            return Err(Error::Config(format!(
                "randomization covers {} users, scenario has {}",
                self.users.len(),
                users
            )));
        }
        for (i, r) in self.users.iter().enumerate() {
            if r.packet_bits.0 > r.packet_bits.1
                || r.first_arrival.0 > r.first_arrival.1
                || r.distance_m.0 > r.distance_m.1
            {
                return Err(Error::Config(format!("empty randomization range for user {i}")));
            }
        }
        Ok(())
    }
}

/// Full experiment description for one environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub radio: RadioParams,
    pub users: Vec<UserConfig>,
    pub mbsfn: Option<MbsfnPattern>,
    pub interference: Vec<InterferenceEntry>,
    /// Size of the quantized action set.
    pub action_count: usize,
    /// Subframes per episode.
    pub episode_length: usize,
    /// Look-ahead window T of the observation.
    pub window: usize,
    /// Rayleigh fading on the SNR-based capacity path. The pinned
    /// reproduction scenarios keep this off; their optima are deterministic.
    pub rayleigh_fading: bool,
    /// Ranges for the training-environment sampler.
    pub randomization: Option<RandomizationSpec>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        if self.users.is_empty() {
            return Err(Error::Config("scenario has no users".into()));
        }
        for (i, u) in self.users.iter().enumerate() {
            if u.user_id != i {
                return Err(Error::Config(format!(
                    "user ids must be dense and ordered: slot {i} holds id {}",
                    u.user_id
                )));
            }
            u.validate()?;
        }
        if let Some(m) = &self.mbsfn {
            m.validate()?;
        }
        for e in &self.interference {
            if e.user_id >= self.users.len() {
                return Err(Error::Config(format!(
                    "interference entry names unknown user {}",
                    e.user_id
                )));
            }
            if e.period < 1 {
                return Err(Error::Config("interference period must be >= 1".into()));
            }
            if e.phase >= e.period {
                return Err(Error::Config("interference phase must be < period".into()));
            }
        }
        if self.action_count < 2 {
            return Err(Error::Config("action_count must be >= 2".into()));
        }
        if self.episode_length < 1 {
            return Err(Error::Config("episode_length must be >= 1".into()));
        }
        if self.window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        if let Some(r) = &self.randomization {
            r.validate(self.users.len())?;
        }
        Ok(())
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// Flattened observation length: 2J + 3JT.
    pub fn observation_dim(&self) -> usize {
        let j = self.users.len();
        2 * j + 3 * j * self.window
    }

    pub fn is_mbsfn(&self, subframe: usize) -> bool {
        self.mbsfn.as_ref().map_or(false, |m| m.is_mbsfn(subframe))
    }

    pub fn is_interfered(&self, user_id: usize, subframe: usize) -> bool {
        self.interference
            .iter()
            .any(|e| e.user_id == user_id && e.is_interfered(subframe))
    }

    /// True when `user` receives a packet at `subframe`.
    pub fn is_arrival(&self, user: &UserConfig, subframe: usize) -> bool {
        subframe >= user.first_arrival
            && (subframe - user.first_arrival) % user.arrival_period == 0
    }

    /// Largest packet size, the normalizer for buffer and arrival blocks.
    pub fn max_packet_bits(&self) -> f64 {
        self.users
            .iter()
            .map(|u| u.packet_bits)
            .fold(0.0, f64::max)
            .max(1.0)
    }
}

/// Default per-user ranges: packet size +/-50%, arrival phase within one
/// period and distance in 50..500 m.
pub fn default_ranges(user: &UserConfig, phase_span: usize) -> UserRanges {
    UserRanges {
        packet_bits: (user.packet_bits * 0.5, user.packet_bits * 1.5),
        first_arrival: (user.first_arrival, user.first_arrival + phase_span),
        distance_m: (50.0, 500.0),
    }
}

/// Draws one training environment from the base scenario's randomization
/// ranges. Sampling is uniform per field and deterministic under the rng.
pub fn sample_environment<R: Rng>(base: &ScenarioConfig, rng: &mut R) -> Result<ScenarioConfig> {
    let spec = match &base.randomization {
        Some(s) => s,
        None => return Ok(base.clone()),
    };
    spec.validate(base.users.len())?;
    let mut out = base.clone();
    for (user, ranges) in out.users.iter_mut().zip(&spec.users) {
        user.packet_bits = sample_f64(rng, ranges.packet_bits);
        user.first_arrival = sample_usize(rng, ranges.first_arrival);
        user.distance_m = sample_f64(rng, ranges.distance_m);
    }
    out.randomization = None;
    out.validate()?;
    Ok(out)
}

fn sample_f64<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn sample_usize<R: Rng>(rng: &mut R, (lo, hi): (usize, usize)) -> usize {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Convenience: flat capacity override for every user, used by the
/// scenarios whose rate model is a pinned constant.
pub fn pin_flat_capacity(cfg: &mut ScenarioConfig, bits_per_prb: f64) {
    for u in &mut cfg.users {
        u.bits_per_prb_override = Some(CapacityOverride::flat(bits_per_prb));
    }
}
