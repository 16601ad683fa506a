//! The four pinned reproduction scenarios.

use crate::error::{Error, Result};
use crate::radio::{CapacityOverride, RadioParams, Rat, UserConfig};

use super::{
    default_ranges, pin_flat_capacity, InterferenceEntry, MbsfnPattern, RandomizationSpec,
    ScenarioConfig,
};

/// Capacity constant for scenarios 1-3: 1000 bits per PRB per subframe
/// (about 5.55 bits/s/Hz over 180 kHz for 1 ms).
pub const FLAT_BITS_PER_PRB: f64 = 1000.0;

/// Scenario-4 transport-block ceilings over the full 25-PRB band.
pub const S4_NR_ALONE_TBS: f64 = 14_112.0;
pub const S4_SHARED_TBS: f64 = 12_576.0;

const EPISODE_LENGTH: usize = 16;
const WINDOW: usize = 10;
const WEIGHT_SLOPE: f64 = 1e-5;

fn user(
    user_id: usize,
    rat: Rat,
    arrival_period: usize,
    packet_bits: f64,
    first_arrival: usize,
    step_delay: usize,
    step_weight: f64,
) -> UserConfig {
    UserConfig {
        user_id,
        rat,
        arrival_period,
        packet_bits,
        first_arrival,
        step_delay,
        step_weight,
        weight_slope: WEIGHT_SLOPE,
        distance_m: 100.0,
        bits_per_prb_override: None,
    }
}

fn base(name: &str, users: Vec<UserConfig>, action_count: usize) -> ScenarioConfig {
    ScenarioConfig {
        name: name.to_string(),
        radio: RadioParams::default(),
        users,
        mbsfn: None,
        interference: Vec::new(),
        action_count,
        episode_length: EPISODE_LENGTH,
        window: WINDOW,
        rayleigh_fading: false,
        randomization: None,
    }
}

fn attach_default_randomization(cfg: &mut ScenarioConfig, phase_spans: &[usize]) {
    let users = cfg
        .users
        .iter()
        .zip(phase_spans)
        .map(|(u, &span)| default_ranges(u, span))
        .collect();
    cfg.randomization = Some(RandomizationSpec { users });
}

/// Builds one of the four pinned scenario configurations.
///
/// 1. MBSFN subframes: two users on a 4-subframe traffic cycle with the
///    last two subframes of each cycle MBSFN-blocked for LTE.
/// 2. Periodic high interference on the LTE user every third subframe.
/// 3. Mixed services: a one-shot 90000-bit burst for a tight-deadline NR
///    user and a relaxed LTE user.
/// 4. Time multiplexing: transport-block ceilings reward giving NR the
///    whole band with LTE silent.
pub fn build_scenario(id: usize) -> Result<ScenarioConfig> {
    let mut cfg = match id {
        1 => {
            let users = vec![
                user(0, Rat::Nr, 4, 45_000.0, 0, 3, 5.0),
                user(1, Rat::Lte, 4, 15_000.0, 0, 3, 5.0),
            ];
            let mut cfg = base("scenario-1", users, 3);
            cfg.mbsfn = Some(MbsfnPattern {
                period: 4,
                mbsfn: vec![false, false, true, true],
            });
            pin_flat_capacity(&mut cfg, FLAT_BITS_PER_PRB);
            attach_default_randomization(&mut cfg, &[3, 3]);
            cfg
        }
        2 => {
            let users = vec![
                user(0, Rat::Nr, 2, 20_000.0, 0, 2, 2.0),
                user(1, Rat::Lte, 2, 14_000.0, 0, 2, 2.0),
            ];
            let mut cfg = base("scenario-2", users, 2);
            cfg.interference = vec![InterferenceEntry {
                user_id: 1,
                period: 3,
                phase: 0,
            }];
            pin_flat_capacity(&mut cfg, FLAT_BITS_PER_PRB);
            attach_default_randomization(&mut cfg, &[1, 1]);
            cfg
        }
        3 => {
            let users = vec![
                user(0, Rat::Nr, 16, 90_000.0, 1, 5, 5.0),
                user(1, Rat::Lte, 16, 90_000.0, 1, 10, 5.0),
            ];
            let mut cfg = base("scenario-3", users, 2);
            pin_flat_capacity(&mut cfg, FLAT_BITS_PER_PRB);
            attach_default_randomization(&mut cfg, &[4, 4]);
            cfg
        }
        4 => {
            let mut nr = user(0, Rat::Nr, 2, 14_000.0, 0, 2, 5.0);
            nr.bits_per_prb_override = Some(CapacityOverride {
                shared_bits_per_prb: S4_SHARED_TBS / 25.0,
                alone_bits_per_prb: S4_NR_ALONE_TBS / 25.0,
            });
            let mut lte = user(1, Rat::Lte, 2, 10_000.0, 0, 2, 5.0);
            lte.bits_per_prb_override = Some(CapacityOverride::flat(S4_SHARED_TBS / 25.0));
            let mut cfg = base("scenario-4", vec![nr, lte], 3);
            attach_default_randomization(&mut cfg, &[1, 1]);
            cfg
        }
        other => {
            return Err(Error::Config(format!(
                "unknown scenario id {other}; valid ids are 1-4"
            )))
        }
    };
    // The sampler must not move a one-shot burst past the last subframe
    // where the episode can still absorb it.
    if id == 3 {
        if let Some(r) = &mut cfg.randomization {
            for u in &mut r.users {
                u.first_arrival = (1, 5);
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pinned_values_scenario1() {
        let s1 = build_scenario(1).unwrap();
        assert_eq!(s1.users[0].packet_bits, 45_000.0);
        assert_eq!(s1.users[1].packet_bits, 15_000.0);
        assert_eq!(s1.users[0].rat, Rat::Nr);
        assert_eq!(s1.users[0].arrival_period, 4);
        assert_eq!(s1.users[0].step_delay, 3);
        let m = s1.mbsfn.as_ref().unwrap();
        assert_eq!(m.period, 4);
        assert_eq!(m.mbsfn, vec![false, false, true, true]);
        assert_eq!(s1.episode_length, 16);
        assert_eq!(s1.window, 10);
    }

    #[test]
    fn pinned_values_scenario2() {
        let s2 = build_scenario(2).unwrap();
        assert_eq!(s2.users[0].arrival_period, 2);
        assert_eq!(s2.users[0].step_delay, 2);
        assert_eq!(s2.users[0].step_weight, 2.0);
        assert_eq!(s2.users[1].step_weight, 2.0);
        assert!(s2.users[0].packet_bits > s2.users[1].packet_bits);
        assert_eq!(s2.interference.len(), 1);
        assert_eq!(s2.interference[0].user_id, 1);
        assert_eq!(s2.interference[0].period, 3);
    }

    #[test]
    fn pinned_values_scenario3() {
        let s3 = build_scenario(3).unwrap();
        assert_eq!(s3.users[0].step_delay, 5);
        assert_eq!(s3.users[1].step_delay, 10);
        assert_eq!(s3.users[0].packet_bits, 90_000.0);
        assert_eq!(s3.users[1].packet_bits, 90_000.0);
        // Data arrives in subframe 1 for both users, once per episode.
        assert_eq!(s3.users[0].first_arrival, 1);
        assert_eq!(s3.users[1].first_arrival, 1);
        assert!(s3.users[0].arrival_period >= s3.episode_length);
    }

    #[test]
    fn pinned_values_scenario4() {
        let s4 = build_scenario(4).unwrap();
        assert_eq!(s4.users[0].packet_bits, 14_000.0);
        assert_eq!(s4.users[1].packet_bits, 10_000.0);
        assert_eq!(s4.users[0].step_weight, 5.0);
        let ov = s4.users[0].bits_per_prb_override.unwrap();
        assert!((ov.alone_bits_per_prb * 25.0 - 14_112.0).abs() < 1e-9);
        assert!((ov.shared_bits_per_prb * 25.0 - 12_576.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(build_scenario(0).is_err());
        assert!(build_scenario(5).is_err());
    }

    #[test]
    fn all_scenarios_validate() {
        for id in 1..=4 {
            build_scenario(id).unwrap().validate().unwrap();
        }
    }
}
