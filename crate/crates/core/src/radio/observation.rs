//! Controller observations.
//!
//! The observation for subframe `p` is built before the subframe's
//! arrivals are applied. Everything the controller sees about the future
//! is schedule independent: arrival patterns, MBSFN and interference
//! patterns and the nominal per-PRB capacity.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scenario::ScenarioConfig;

use super::params::{bits_per_prb, LinkConditions, Rat};
use super::state::NetworkState;

/// The five observation blocks. `flatten` produces the network input in
/// the fixed order: NR support, buffer state, MBSFN matrix, predicted
/// bits per PRB, predicted arrivals; matrices are user-major with the
/// look-ahead columns covering subframes `p .. p+T-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub user_count: usize,
    pub window: usize,
    pub nr_support: Vec<f64>,
    pub buffer_bits: Vec<f64>,
    pub mbsfn: Vec<f64>,
    pub predicted_bits_per_prb: Vec<f64>,
    pub predicted_arrivals: Vec<f64>,
}

impl Observation {
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend_from_slice(&self.nr_support);
        out.extend_from_slice(&self.buffer_bits);
        out.extend_from_slice(&self.mbsfn);
        out.extend_from_slice(&self.predicted_bits_per_prb);
        out.extend_from_slice(&self.predicted_arrivals);
        out
    }

    pub fn len(&self) -> usize {
        2 * self.user_count + 3 * self.user_count * self.window
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Nominal bits per PRB of `user` at future subframe `q`, before knowing
/// any scheduling decision: interference and MBSFN zeros apply, NR users
/// see the alone-context capacity in MBSFN subframes (LTE cannot be
/// there) and the shared-context capacity otherwise. Fading prediction
/// uses the mean channel gain.
pub fn predicted_bits_per_prb(cfg: &ScenarioConfig, user_id: usize, q: usize) -> Result<f64> {
    let user = &cfg.users[user_id];
    let mbsfn = cfg.is_mbsfn(q);
    let link = LinkConditions {
        mbsfn,
        interfered: cfg.is_interfered(user_id, q),
        lte_active: match user.rat {
            Rat::Lte => true,
            Rat::Nr => !mbsfn,
        },
        fading_gain: 1.0,
    };
    bits_per_prb(user, &cfg.radio, &link)
}

/// Largest nominal per-PRB capacity in the scenario, the normalizer of
/// the capacity block.
pub fn max_bits_per_prb(cfg: &ScenarioConfig) -> Result<f64> {
    let mut best: f64 = 0.0;
    for user in &cfg.users {
        for lte_active in [false, true] {
            let link = LinkConditions {
                mbsfn: false,
                interfered: false,
                lte_active,
                fading_gain: 1.0,
            };
            best = best.max(bits_per_prb(user, &cfg.radio, &link)?);
        }
    }
    Ok(best.max(1.0))
}

/// Builds the observation for the current subframe with look-ahead `window`.
pub fn build_observation(
    cfg: &ScenarioConfig,
    state: &NetworkState,
    window: usize,
) -> Result<Observation> {
    let j = cfg.users.len();
    let p = state.subframe;
    let max_packet = cfg.max_packet_bits();
    let max_prb = max_bits_per_prb(cfg)?;

    let nr_support: Vec<f64> = cfg
        .users
        .iter()
        .map(|u| if u.rat == Rat::Nr { 1.0 } else { 0.0 })
        .collect();

    let buffer_bits: Vec<f64> = (0..j)
        .map(|i| (state.queues[i].total_bits() / max_packet).min(1.0))
        .collect();

    let mut mbsfn = Vec::with_capacity(j * window);
    let mut capacity = Vec::with_capacity(j * window);
    let mut arrivals = Vec::with_capacity(j * window);
    for (i, user) in cfg.users.iter().enumerate() {
        for t in 0..window {
            let q = p + t;
            let flag = user.rat == Rat::Lte && cfg.is_mbsfn(q);
            mbsfn.push(if flag { 1.0 } else { 0.0 });
            capacity.push(predicted_bits_per_prb(cfg, i, q)? / max_prb);
            let bits = if cfg.is_arrival(user, q) { user.packet_bits } else { 0.0 };
            arrivals.push((bits / max_packet).min(1.0));
        }
    }

    Ok(Observation {
        user_count: j,
        window,
        nr_support,
        buffer_bits,
        mbsfn,
        predicted_bits_per_prb: capacity,
        predicted_arrivals: arrivals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::build_scenario;

    #[test]
    fn flattened_length_matches_contract() {
        let cfg = build_scenario(1).unwrap();
        let state = NetworkState::new(2, 0);
        let obs = build_observation(&cfg, &state, cfg.window).unwrap();
        let flat = obs.flatten();
        assert_eq!(flat.len(), 2 * 2 + 3 * 2 * 10);
        assert_eq!(flat.len(), cfg.observation_dim());
        assert!(flat.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn scenario1_mbsfn_row_follows_pattern() {
        let cfg = build_scenario(1).unwrap();
        let state = NetworkState::new(2, 0);
        let obs = build_observation(&cfg, &state, 10).unwrap();
        // LTE user is index 1; rows are user-major.
        let lte_row = &obs.mbsfn[10..20];
        let expected = [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0];
        assert_eq!(lte_row, &expected);
        // NR users are never MBSFN-blocked.
        assert!(obs.mbsfn[0..10].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nr_support_vector_marks_the_nr_user() {
        let cfg = build_scenario(1).unwrap();
        let state = NetworkState::new(2, 0);
        let obs = build_observation(&cfg, &state, 10).unwrap();
        assert_eq!(obs.nr_support, vec![1.0, 0.0]);
    }

    #[test]
    fn arrival_marks_follow_the_period() {
        let mut cfg = build_scenario(1).unwrap();
        cfg.users[0].arrival_period = 2;
        cfg.users[0].packet_bits = 14_000.0;
        cfg.users[0].first_arrival = 0;
        let state = NetworkState::new(2, 0);
        let obs = build_observation(&cfg, &state, 4).unwrap();
        let row = &obs.predicted_arrivals[0..4];
        let norm = 14_000.0 / cfg.max_packet_bits();
        assert_eq!(row, &[norm, 0.0, norm, 0.0]);
    }

    #[test]
    fn buffer_block_clamps_to_one() {
        let cfg = build_scenario(1).unwrap();
        let mut state = NetworkState::new(2, 0);
        state.queues[0].push_arrival(0, 45_000.0);
        state.queues[0].push_arrival(4, 45_000.0);
        let obs = build_observation(&cfg, &state, 10).unwrap();
        assert_eq!(obs.buffer_bits[0], 1.0);
    }

    #[test]
    fn interference_zeroes_predicted_capacity() {
        let cfg = build_scenario(2).unwrap();
        let state = NetworkState::new(2, 0);
        let obs = build_observation(&cfg, &state, 6).unwrap();
        // LTE user (index 1) is interfered at subframes 0, 3, 6...
        let lte_caps = &obs.predicted_bits_per_prb[6..12];
        assert_eq!(lte_caps[0], 0.0);
        assert!(lte_caps[1] > 0.0);
        assert!(lte_caps[2] > 0.0);
        assert_eq!(lte_caps[3], 0.0);
    }

    #[test]
    fn scenario4_nr_capacity_shows_no_action_dependence() {
        // The alone-context bonus is not observable ahead of time in a
        // scenario without MBSFN: the prediction stays at the shared TBS.
        let cfg = build_scenario(4).unwrap();
        let state = NetworkState::new(2, 0);
        let obs = build_observation(&cfg, &state, 10).unwrap();
        let max = max_bits_per_prb(&cfg).unwrap();
        let shared = 12_576.0 / 25.0;
        for t in 0..10 {
            assert!((obs.predicted_bits_per_prb[t] - shared / max).abs() < 1e-12);
        }
    }
}
