//! Per-subframe scheduling, delay weights and the reward.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scenario::ScenarioConfig;

use super::action::Action;
use super::params::{bits_per_prb, LinkConditions, Rat, UserConfig};
use super::state::NetworkState;

/// Conditions of one subframe that scheduling has to respect, plus which
/// RATs ended up transmitting in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubframeContext {
    pub subframe: usize,
    pub is_mbsfn: bool,
    /// Per-user interference flags, parallel to the user list.
    pub interfered: Vec<bool>,
    pub lte_scheduled: bool,
    pub nr_scheduled: bool,
}

impl SubframeContext {
    /// Schedule-independent part of the context at `subframe`.
    pub fn at(cfg: &ScenarioConfig, subframe: usize) -> Self {
        Self {
            subframe,
            is_mbsfn: cfg.is_mbsfn(subframe),
            interfered: (0..cfg.users.len())
                .map(|j| cfg.is_interfered(j, subframe))
                .collect(),
            lte_scheduled: false,
            nr_scheduled: false,
        }
    }
}

/// Outcome of scheduling one subframe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleResult {
    pub subframe: usize,
    /// PRBs granted per user.
    pub allocated_prbs: Vec<usize>,
    /// Bits drained from each user's buffer.
    pub served_bits: Vec<f64>,
    /// Post-schedule delay weights per user.
    pub weights: Vec<f64>,
    pub reward: f64,
    pub lte_scheduled: bool,
    pub nr_scheduled: bool,
}

/// Delay weight of one user after waiting `t` subframes.
/// An empty buffer carries no weight at all.
pub fn user_weight(t: usize, cfg: &UserConfig, buffer_empty: bool) -> f64 {
    if buffer_empty {
        return 0.0;
    }
    let slope = cfg.weight_slope * t as f64;
    if t < cfg.step_delay {
        slope
    } else {
        slope + cfg.step_weight
    }
}

/// Subframe reward from the per-user weights: `exp(-sum w)`, in (0, 1].
pub fn subframe_reward(weights: &[f64]) -> f64 {
    (-weights.iter().sum::<f64>()).exp()
}

fn waiting_time(subframe: usize, oldest_arrival: Option<usize>) -> usize {
    oldest_arrival.map_or(0, |a| subframe.saturating_sub(a))
}

/// Schedules one subframe under the given bandwidth split.
///
/// Each RAT works through its own budget independently: users in order
/// of decreasing current weight (ties to the lower user id) take
/// `ceil(remaining / bits_per_prb)` PRBs, capped by what is left of the
/// budget, and the served bits drain their oldest packets first. LTE is
/// resolved first so that NR capacity can account for whether LTE
/// transmits in the subframe. Weights are then recomputed on the
/// post-drain buffers and folded into the reward.
pub fn schedule_subframe(
    cfg: &ScenarioConfig,
    state: &mut NetworkState,
    fading: &[f64],
    action: &Action,
) -> Result<ScheduleResult> {
    let p = state.subframe;
    let mut ctx = SubframeContext::at(cfg, p);
    let users = &cfg.users;
    let j = users.len();

    // Sort key: weight on the pre-drain buffers.
    let mut order: Vec<usize> = (0..j).collect();
    let presort: Vec<f64> = (0..j)
        .map(|i| {
            let q = &state.queues[i];
            user_weight(waiting_time(p, q.oldest_arrival()), &users[i], q.is_empty())
        })
        .collect();
    order.sort_by(|&a, &b| {
        presort[b]
            .partial_cmp(&presort[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut allocated = vec![0usize; j];
    let mut served = vec![0.0f64; j];

    // Whether LTE will transmit decides the NR symbol budget, and is
    // known before any grant: it only depends on LTE demand and capacity.
    let lte_budget = action.lte_prbs;
    ctx.lte_scheduled = lte_budget > 0
        && order.iter().any(|&i| {
            users[i].rat == Rat::Lte
                && !state.queues[i].is_empty()
                && per_prb(&users[i], cfg, &ctx, fading[i], false) > 0.0
        });

    for rat in [Rat::Lte, Rat::Nr] {
        let mut budget = match rat {
            Rat::Lte => action.lte_prbs,
            Rat::Nr => action.nr_prbs,
        };
        for &i in &order {
            if users[i].rat != rat || budget == 0 {
                continue;
            }
            let remaining = state.queues[i].total_bits();
            if remaining <= 0.0 {
                continue;
            }
            let rate = per_prb(&users[i], cfg, &ctx, fading[i], ctx.lte_scheduled);
            if rate <= 0.0 {
                continue;
            }
            let need = (remaining / rate).ceil() as usize;
            let grant = need.min(budget);
            let capacity = grant as f64 * rate;
            let drained = state.queues[i].drain(capacity.min(remaining));
            allocated[i] = grant;
            served[i] = drained;
            budget -= grant;
        }
        if rat == Rat::Nr {
            ctx.nr_scheduled = users
                .iter()
                .enumerate()
                .any(|(i, u)| u.rat == Rat::Nr && allocated[i] > 0);
        }
    }

    let weights: Vec<f64> = (0..j)
        .map(|i| {
            let q = &state.queues[i];
            user_weight(waiting_time(p, q.oldest_arrival()), &users[i], q.is_empty())
        })
        .collect();
    let reward = subframe_reward(&weights);

    Ok(ScheduleResult {
        subframe: p,
        allocated_prbs: allocated,
        served_bits: served,
        weights,
        reward,
        lte_scheduled: ctx.lte_scheduled,
        nr_scheduled: ctx.nr_scheduled,
    })
}

fn per_prb(
    user: &UserConfig,
    cfg: &ScenarioConfig,
    ctx: &SubframeContext,
    fading_gain: f64,
    lte_active: bool,
) -> f64 {
    let link = LinkConditions {
        mbsfn: ctx.is_mbsfn,
        interfered: ctx.interfered[user.user_id],
        lte_active,
        fading_gain,
    };
    // Config validation guarantees the capacity model's preconditions.
    bits_per_prb(user, &cfg.radio, &link).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radio::action_space;
    use crate::radio::state::apply_arrivals;
    use crate::scenario::build_scenario;

    fn weight_cfg(delay: usize, step: f64, slope: f64) -> UserConfig {
        UserConfig {
            user_id: 0,
            rat: Rat::Nr,
            arrival_period: 1,
            packet_bits: 1000.0,
            first_arrival: 0,
            step_delay: delay,
            step_weight: step,
            weight_slope: slope,
            distance_m: 100.0,
            bits_per_prb_override: None,
        }
    }

    #[test]
    fn weight_branches() {
        let cfg = weight_cfg(3, 5.0, 1e-5);
        assert_eq!(user_weight(10, &cfg, true), 0.0);
        assert!((user_weight(2, &cfg, false) - 2e-5).abs() < 1e-18);
        assert!((user_weight(3, &cfg, false) - 5.00003).abs() < 1e-12);
    }

    #[test]
    fn reward_values() {
        assert_eq!(subframe_reward(&[0.0, 0.0]), 1.0);
        assert!((subframe_reward(&[5.0]) - (-5.0f64).exp()).abs() < 1e-15);
        assert!((subframe_reward(&[0.5, 0.5]) - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn empty_buffers_score_perfect_reward() {
        let cfg = build_scenario(1).unwrap();
        let mut state = NetworkState::new(2, 0);
        let actions = action_space(cfg.action_count, cfg.radio.total_prbs).unwrap();
        let res = schedule_subframe(&cfg, &mut state, &[1.0, 1.0], &actions[1]).unwrap();
        assert_eq!(res.served_bits, vec![0.0, 0.0]);
        assert_eq!(res.reward, 1.0);
    }

    #[test]
    fn scenario3_all_nr_drains_full_band() {
        let cfg = build_scenario(3).unwrap();
        let mut state = NetworkState::new(2, 0);
        state.subframe = 1;
        apply_arrivals(&cfg, &mut state);
        let actions = action_space(cfg.action_count, cfg.radio.total_prbs).unwrap();
        // Action 0 is the all-NR split.
        let res = schedule_subframe(&cfg, &mut state, &[1.0, 1.0], &actions[0]).unwrap();
        assert_eq!(res.served_bits[0], 25_000.0);
        assert_eq!(res.served_bits[1], 0.0);
        assert_eq!(res.allocated_prbs[0], 25);
    }

    #[test]
    fn mbsfn_blocks_lte_despite_allocation() {
        let cfg = build_scenario(1).unwrap();
        let mut state = NetworkState::new(2, 0);
        state.queues[1].push_arrival(0, 15_000.0);
        state.subframe = 2; // MBSFN in the pinned pattern
        let actions = action_space(3, 25).unwrap();
        let res = schedule_subframe(&cfg, &mut state, &[1.0, 1.0], &actions[1]).unwrap();
        assert_eq!(res.served_bits[1], 0.0);
        assert_eq!(res.allocated_prbs[1], 0);
        assert!(!res.lte_scheduled);
    }

    #[test]
    fn higher_weight_user_is_served_first() {
        let mut cfg = build_scenario(3).unwrap();
        cfg.users[0].rat = Rat::Nr;
        cfg.users[1].rat = Rat::Nr;
        let mut state = NetworkState::new(2, 0);
        // User 1 has waited longer and outweighs user 0.
        state.queues[0].push_arrival(4, 30_000.0);
        state.queues[1].push_arrival(0, 30_000.0);
        state.subframe = 5;
        let actions = action_space(2, 25).unwrap();
        let res = schedule_subframe(&cfg, &mut state, &[1.0, 1.0], &actions[0]).unwrap();
        assert_eq!(res.served_bits[1], 25_000.0);
        assert_eq!(res.served_bits[0], 0.0);
    }

    #[test]
    fn weight_tie_breaks_to_lower_user_id() {
        let mut cfg = build_scenario(3).unwrap();
        cfg.users[0].rat = Rat::Nr;
        cfg.users[1].rat = Rat::Nr;
        let mut state = NetworkState::new(2, 0);
        state.queues[0].push_arrival(0, 30_000.0);
        state.queues[1].push_arrival(0, 30_000.0);
        state.subframe = 1;
        let actions = action_space(2, 25).unwrap();
        let res = schedule_subframe(&cfg, &mut state, &[1.0, 1.0], &actions[0]).unwrap();
        assert_eq!(res.served_bits[0], 25_000.0);
        assert_eq!(res.served_bits[1], 0.0);
    }

    #[test]
    fn nr_gets_alone_symbols_when_lte_has_nothing() {
        // Scenario 4: with an empty LTE buffer the NR user sees the
        // larger alone-context transport block even on a shared split.
        let cfg = build_scenario(4).unwrap();
        let mut state = NetworkState::new(2, 0);
        state.queues[0].push_arrival(0, 14_000.0);
        let actions = action_space(3, 25).unwrap();
        let res = schedule_subframe(&cfg, &mut state, &[1.0, 1.0], &actions[0]).unwrap();
        assert!(!res.lte_scheduled);
        assert_eq!(res.served_bits[0], 14_000.0);
        // 14000 bits at 564.48 bits/PRB need 25 PRBs.
        assert_eq!(res.allocated_prbs[0], 25);
    }

    #[test]
    fn nr_loses_alone_bonus_when_lte_transmits() {
        let cfg = build_scenario(4).unwrap();
        let mut state = NetworkState::new(2, 0);
        state.queues[0].push_arrival(0, 14_000.0);
        state.queues[1].push_arrival(0, 10_000.0);
        let actions = action_space(3, 25).unwrap();
        // Middle split: LTE transmits, so NR works at 503.04 bits/PRB.
        let res = schedule_subframe(&cfg, &mut state, &[1.0, 1.0], &actions[1]).unwrap();
        assert!(res.lte_scheduled);
        let expected_nr = 12.0 * (12_576.0 / 25.0);
        assert!((res.served_bits[0] - expected_nr).abs() < 1e-9);
    }
}
