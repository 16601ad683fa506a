//! The radio environment: a deterministic-by-default subframe simulator
//! of one co-located LTE+NR cell.

mod action;
mod observation;
mod params;
mod queue;
mod schedule;
mod state;

pub use action::{action_space, Action};
pub use observation::{build_observation, max_bits_per_prb, predicted_bits_per_prb, Observation};
pub use params::{
    achievable_rate_bps, bits_per_prb, dbm_to_watts, path_loss_db, snr_linear, CapacityOverride,
    LinkConditions, RadioParams, Rat, UserConfig, LTE_DATA_SYMBOLS, NR_DATA_SYMBOLS_ALONE,
    NR_DATA_SYMBOLS_SHARED, SUBFRAME_SYMBOLS,
};
pub use queue::{Packet, PacketQueue};
pub use schedule::{schedule_subframe, subframe_reward, user_weight, ScheduleResult, SubframeContext};
pub use state::{apply_arrivals, NetworkState};

use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

/// What one environment step produced.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub reward: f64,
    pub schedule: ScheduleResult,
}

/// One episode-scoped environment instance: a scenario plus its dynamic
/// state. Instances are independent and safe to run in parallel; all
/// randomness is instance-local and derived from the seed.
#[derive(Debug, Clone)]
pub struct RadioEnv {
    cfg: ScenarioConfig,
    state: NetworkState,
    actions: Vec<Action>,
    arrived_bits: f64,
    served_bits: f64,
}

impl RadioEnv {
    pub fn new(cfg: &ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        if cfg.randomization.is_some() {
            // An instance runs one concrete environment; sampling happens
            // before construction.
            let mut pinned = cfg.clone();
            pinned.randomization = None;
            return Self::new(&pinned, seed);
        }
        let actions = action_space(cfg.action_count, cfg.radio.total_prbs)?;
        Ok(Self {
            cfg: cfg.clone(),
            state: NetworkState::new(cfg.users.len(), seed),
            actions,
            arrived_bits: 0.0,
            served_bits: 0.0,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn subframe(&self) -> usize {
        self.state.subframe
    }

    pub fn is_finished(&self) -> bool {
        self.state.subframe >= self.cfg.episode_length
    }

    /// Total bits that have entered the buffers so far.
    pub fn arrived_bits(&self) -> f64 {
        self.arrived_bits
    }

    /// Total bits served so far.
    pub fn served_bits(&self) -> f64 {
        self.served_bits
    }

    /// Bits currently buffered across all users.
    pub fn buffered_bits(&self) -> f64 {
        self.state.queues.iter().map(|q| q.total_bits()).sum()
    }

    /// Observation for the upcoming subframe (before its arrivals).
    pub fn observation(&self) -> Result<Observation> {
        build_observation(&self.cfg, &self.state, self.cfg.window)
    }

    /// Buffer bits plus the arrivals the upcoming subframe will bring:
    /// the demand the subframe's scheduler will face. Scripted agents
    /// work from this view.
    pub fn pending_demand_bits(&self, user_id: usize) -> f64 {
        let user = &self.cfg.users[user_id];
        let mut demand = self.state.queues[user_id].total_bits();
        if self.cfg.is_arrival(user, self.state.subframe) {
            demand += user.packet_bits;
        }
        demand
    }

    /// Advances one subframe: applies arrivals, schedules under the
    /// chosen split, returns the reward. Deterministic given the seed.
    pub fn step(&mut self, action_index: usize) -> Result<StepOutcome> {
        if self.is_finished() {
            return Err(Error::Usage(format!(
                "episode finished after {} subframes; reset the environment",
                self.cfg.episode_length
            )));
        }
        let action = *self
            .actions
            .get(action_index)
            .ok_or_else(|| Error::Usage(format!("action index {action_index} out of range")))?;

        apply_arrivals(&self.cfg, &mut self.state);
        for user in &self.cfg.users {
            if self.cfg.is_arrival(user, self.state.subframe) {
                self.arrived_bits += user.packet_bits;
            }
        }

        let fading: Vec<f64> = if self.cfg.rayleigh_fading {
            (0..self.cfg.users.len())
                .map(|_| self.state.draw_fading_gain())
                .collect()
        } else {
            vec![1.0; self.cfg.users.len()]
        };

        let schedule = schedule_subframe(&self.cfg, &mut self.state, &fading, &action)?;
        self.served_bits += schedule.served_bits.iter().sum::<f64>();
        self.state.subframe += 1;
        Ok(StepOutcome {
            reward: schedule.reward,
            schedule,
        })
    }

    /// Runs a full episode under a fixed action sequence, returning the
    /// per-subframe rewards.
    pub fn rollout(&mut self, actions: &[usize]) -> Result<Vec<f64>> {
        let mut rewards = Vec::with_capacity(actions.len());
        for &a in actions {
            rewards.push(self.step(a)?.reward);
        }
        Ok(rewards)
    }
}
