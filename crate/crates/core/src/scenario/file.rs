//! Scenario files: flat `key = value` text with dotted keys.
//!
//! The schema is versioned through the mandatory `schema` key. Unknown
//! keys are rejected so typos fail loudly instead of silently falling
//! back to defaults. `write_scenario` and `parse_scenario` round-trip.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::radio::{CapacityOverride, RadioParams, Rat, UserConfig};

use super::{
    InterferenceEntry, MbsfnPattern, RandomizationSpec, ScenarioConfig, UserRanges,
};

pub const SCENARIO_SCHEMA: &str = "1";

/// Renders a scenario to the flat key-value text format.
pub fn write_scenario(cfg: &ScenarioConfig) -> String {
    let map = to_map(cfg);
    let mut out = String::new();
    for (k, v) in &map {
        out.push_str(k);
        out.push_str(" = ");
        out.push_str(v);
        out.push('\n');
    }
    out
}

/// Parses the flat key-value text format into a scenario.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Format(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(Error::Format(format!("duplicate key `{key}`")));
        }
    }
    from_map(&map)
}

/// Applies one dotted-key override, e.g. `user.0.packet_bits = 30000`.
pub fn apply_scenario_override(cfg: &ScenarioConfig, key: &str, value: &str) -> Result<ScenarioConfig> {
    let mut map = to_map(cfg);
    if !map.contains_key(key) {
        return Err(Error::Config(format!("unknown scenario key `{key}`")));
    }
    map.insert(key.to_string(), value.to_string());
    from_map(&map)
}

fn fmt_bool(b: bool) -> String {
    if b { "true".into() } else { "false".into() }
}

fn to_map(cfg: &ScenarioConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    let mut put = |k: String, v: String| {
        m.insert(k, v);
    };
    put("schema".into(), SCENARIO_SCHEMA.into());
    put("name".into(), cfg.name.clone());
    put("action_count".into(), cfg.action_count.to_string());
    put("episode_length".into(), cfg.episode_length.to_string());
    put("window".into(), cfg.window.to_string());
    put("rayleigh_fading".into(), fmt_bool(cfg.rayleigh_fading));

    put("radio.carrier_freq_ghz".into(), cfg.radio.carrier_freq_ghz.to_string());
    put("radio.total_prbs".into(), cfg.radio.total_prbs.to_string());
    put("radio.prb_bandwidth_hz".into(), cfg.radio.prb_bandwidth_hz.to_string());
    put("radio.tx_power_per_prb_w".into(), cfg.radio.tx_power_per_prb_w.to_string());
    put(
        "radio.noise_power_per_prb_dbm".into(),
        cfg.radio.noise_power_per_prb_dbm.to_string(),
    );
    put(
        "radio.spectral_efficiency_cap".into(),
        cfg.radio.spectral_efficiency_cap.to_string(),
    );

    if let Some(mb) = &cfg.mbsfn {
        put("mbsfn.period".into(), mb.period.to_string());
        let pat: Vec<&str> = mb.mbsfn.iter().map(|&b| if b { "1" } else { "0" }).collect();
        put("mbsfn.pattern".into(), pat.join(","));
    }
    for (k, e) in cfg.interference.iter().enumerate() {
        put(format!("interference.{k}.user"), e.user_id.to_string());
        put(format!("interference.{k}.period"), e.period.to_string());
        put(format!("interference.{k}.phase"), e.phase.to_string());
    }
    for u in &cfg.users {
        let p = format!("user.{}", u.user_id);
        put(format!("{p}.rat"), u.rat.to_string());
        put(format!("{p}.arrival_period"), u.arrival_period.to_string());
        put(format!("{p}.packet_bits"), u.packet_bits.to_string());
        put(format!("{p}.first_arrival"), u.first_arrival.to_string());
        put(format!("{p}.step_delay"), u.step_delay.to_string());
        put(format!("{p}.step_weight"), u.step_weight.to_string());
        put(format!("{p}.weight_slope"), u.weight_slope.to_string());
        put(format!("{p}.distance_m"), u.distance_m.to_string());
        if let Some(ov) = &u.bits_per_prb_override {
            put(format!("{p}.bits_per_prb.shared"), ov.shared_bits_per_prb.to_string());
            put(format!("{p}.bits_per_prb.alone"), ov.alone_bits_per_prb.to_string());
        }
    }
    if let Some(r) = &cfg.randomization {
        for (i, u) in r.users.iter().enumerate() {
            let p = format!("randomization.user.{i}");
            put(
                format!("{p}.packet_bits"),
                format!("{},{}", u.packet_bits.0, u.packet_bits.1),
            );
            put(
                format!("{p}.first_arrival"),
                format!("{},{}", u.first_arrival.0, u.first_arrival.1),
            );
            put(
                format!("{p}.distance_m"),
                format!("{},{}", u.distance_m.0, u.distance_m.1),
            );
        }
    }
    m
}

struct MapReader<'a> {
    map: &'a BTreeMap<String, String>,
    used: std::cell::RefCell<std::collections::BTreeSet<String>>,
}

impl<'a> MapReader<'a> {
    fn new(map: &'a BTreeMap<String, String>) -> Self {
        Self {
            map,
            used: Default::default(),
        }
    }

    fn get(&self, key: &str) -> Result<&'a str> {
        self.opt(key)
            .ok_or_else(|| Error::Format(format!("missing key `{key}`")))
    }

    fn opt(&self, key: &str) -> Option<&'a str> {
        let v = self.map.get(key)?;
        self.used.borrow_mut().insert(key.to_string());
        Some(v.as_str())
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| Error::Format(format!("key `{key}`: cannot parse `{raw}`")))
    }

    fn parse_opt<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.opt(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| Error::Format(format!("key `{key}`: cannot parse `{raw}`"))),
        }
    }

    fn finish(self) -> Result<()> {
        let used = self.used.borrow();
        for k in self.map.keys() {
            if !used.contains(k) {
                return Err(Error::Format(format!("unknown key `{k}`")));
            }
        }
        Ok(())
    }
}

fn parse_pair<T: std::str::FromStr + Copy>(key: &str, raw: &str) -> Result<(T, T)> {
    let parts: Vec<&str> = raw.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::Format(format!("key `{key}`: expected `lo,hi`, got `{raw}`")));
    }
    let lo = parts[0]
        .parse()
        .map_err(|_| Error::Format(format!("key `{key}`: cannot parse `{}`", parts[0])))?;
    let hi = parts[1]
        .parse()
        .map_err(|_| Error::Format(format!("key `{key}`: cannot parse `{}`", parts[1])))?;
    Ok((lo, hi))
}

fn from_map(map: &BTreeMap<String, String>) -> Result<ScenarioConfig> {
    let r = MapReader::new(map);
    let schema = r.get("schema")?;
    if schema != SCENARIO_SCHEMA {
        return Err(Error::Format(format!(
            "unsupported scenario schema `{schema}` (this build reads schema {SCENARIO_SCHEMA})"
        )));
    }

    let radio = RadioParams {
        carrier_freq_ghz: r.parse("radio.carrier_freq_ghz")?,
        total_prbs: r.parse("radio.total_prbs")?,
        prb_bandwidth_hz: r.parse("radio.prb_bandwidth_hz")?,
        tx_power_per_prb_w: r.parse("radio.tx_power_per_prb_w")?,
        noise_power_per_prb_dbm: r.parse("radio.noise_power_per_prb_dbm")?,
        spectral_efficiency_cap: r.parse("radio.spectral_efficiency_cap")?,
    };

    let mbsfn = match r.parse_opt::<usize>("mbsfn.period")? {
        None => None,
        Some(period) => {
            let raw = r.get("mbsfn.pattern")?;
            let mbsfn: Vec<bool> = raw
                .split(',')
                .map(|s| match s.trim() {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(Error::Format(format!(
                        "mbsfn.pattern: expected 0 or 1, got `{other}`"
                    ))),
                })
                .collect::<Result<_>>()?;
            Some(MbsfnPattern { period, mbsfn })
        }
    };

    let mut interference = Vec::new();
    for k in 0.. {
        match r.parse_opt::<usize>(&format!("interference.{k}.user"))? {
            None => break,
            Some(user_id) => interference.push(InterferenceEntry {
                user_id,
                period: r.parse(&format!("interference.{k}.period"))?,
                phase: r.parse(&format!("interference.{k}.phase"))?,
            }),
        }
    }

    let mut users = Vec::new();
    for i in 0.. {
        let p = format!("user.{i}");
        let rat = match r.opt(&format!("{p}.rat")) {
            None => break,
            Some("lte") => Rat::Lte,
            Some("nr") => Rat::Nr,
            Some(other) => {
                return Err(Error::Format(format!("{p}.rat: expected lte or nr, got `{other}`")))
            }
        };
        let shared: Option<f64> = r.parse_opt(&format!("{p}.bits_per_prb.shared"))?;
        let alone: Option<f64> = r.parse_opt(&format!("{p}.bits_per_prb.alone"))?;
        let bits_per_prb_override = match (shared, alone) {
            (None, None) => None,
            (Some(s), Some(a)) => Some(CapacityOverride {
                shared_bits_per_prb: s,
                alone_bits_per_prb: a,
            }),
            _ => {
                return Err(Error::Format(format!(
                    "{p}.bits_per_prb: shared and alone must be given together"
                )))
            }
        };
        users.push(UserConfig {
            user_id: i,
            rat,
            arrival_period: r.parse(&format!("{p}.arrival_period"))?,
            packet_bits: r.parse(&format!("{p}.packet_bits"))?,
            first_arrival: r.parse(&format!("{p}.first_arrival"))?,
            step_delay: r.parse(&format!("{p}.step_delay"))?,
            step_weight: r.parse(&format!("{p}.step_weight"))?,
            weight_slope: r.parse(&format!("{p}.weight_slope"))?,
            distance_m: r.parse(&format!("{p}.distance_m"))?,
            bits_per_prb_override,
        });
    }

    let mut rand_users = Vec::new();
    for i in 0..users.len() {
        let p = format!("randomization.user.{i}");
        match r.opt(&format!("{p}.packet_bits")) {
            None => break,
            Some(raw) => {
                let packet_bits = parse_pair(&format!("{p}.packet_bits"), raw)?;
                let first_arrival =
                    parse_pair(&format!("{p}.first_arrival"), r.get(&format!("{p}.first_arrival"))?)?;
                let distance_m =
                    parse_pair(&format!("{p}.distance_m"), r.get(&format!("{p}.distance_m"))?)?;
                rand_users.push(UserRanges {
                    packet_bits,
                    first_arrival,
                    distance_m,
                });
            }
        }
    }
    let randomization = if rand_users.is_empty() {
        None
    } else {
        Some(RandomizationSpec { users: rand_users })
    };

    let cfg = ScenarioConfig {
        name: r.get("name")?.to_string(),
        radio,
        users,
        mbsfn,
        interference,
        action_count: r.parse("action_count")?,
        episode_length: r.parse("episode_length")?,
        window: r.parse("window")?,
        rayleigh_fading: r.parse("rayleigh_fading")?,
        randomization,
    };
    r.finish()?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::build_scenario;

    #[test]
    fn round_trip_all_pinned_scenarios() {
        for id in 1..=4 {
            let cfg = build_scenario(id).unwrap();
            let text = write_scenario(&cfg);
            let back = parse_scenario(&text).unwrap();
            assert_eq!(cfg, back, "scenario {id} did not round-trip");
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let cfg = build_scenario(1).unwrap();
        let mut text = write_scenario(&cfg);
        text.push_str("user.0.packett_bits = 5\n");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let cfg = build_scenario(1).unwrap();
        let text = write_scenario(&cfg).replace("schema = 1", "schema = 99");
        let err = parse_scenario(&text).unwrap_err();
        assert!(err.to_string().contains("schema"), "{err}");
    }

    #[test]
    fn override_changes_one_field() {
        let cfg = build_scenario(2).unwrap();
        let out = apply_scenario_override(&cfg, "user.0.packet_bits", "30000").unwrap();
        assert_eq!(out.users[0].packet_bits, 30_000.0);
        assert_eq!(out.users[1], cfg.users[1]);
        assert!(apply_scenario_override(&cfg, "user.0.nope", "1").is_err());
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = build_scenario(1).unwrap();
        let text = format!("# pinned study\n\n{}", write_scenario(&cfg));
        assert_eq!(parse_scenario(&text).unwrap(), cfg);
    }
}
