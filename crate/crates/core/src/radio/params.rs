//! Radio link parameters, per-user traffic/QoS configuration and the
//! per-PRB capacity model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbols per subframe (normal cyclic prefix).
pub const SUBFRAME_SYMBOLS: f64 = 14.0;
/// Data symbols available to LTE (PDCCH occupies the leading symbols).
pub const LTE_DATA_SYMBOLS: f64 = 12.0;
/// Data symbols for NR while LTE transmits in the same subframe.
pub const NR_DATA_SYMBOLS_SHARED: f64 = 11.0;
/// Data symbols for NR when it has the subframe to itself.
pub const NR_DATA_SYMBOLS_ALONE: f64 = 13.0;
/// Subframe duration in seconds.
pub const SUBFRAME_SECONDS: f64 = 1e-3;

/// Radio access technology of a user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rat {
    Lte,
    Nr,
}

impl std::fmt::Display for Rat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rat::Lte => write!(f, "lte"),
            Rat::Nr => write!(f, "nr"),
        }
    }
}

/// Cell-level radio constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub carrier_freq_ghz: f64,
    /// Total resource blocks shared by both RATs (C).
    pub total_prbs: usize,
    /// Bandwidth of one PRB in Hz.
    pub prb_bandwidth_hz: f64,
    /// Transmit power per PRB in watts.
    pub tx_power_per_prb_w: f64,
    /// Noise power per PRB in dBm (negative).
    pub noise_power_per_prb_dbm: f64,
    /// Spectral efficiency ceiling in bits/s/Hz.
    pub spectral_efficiency_cap: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            carrier_freq_ghz: 3.5,
            total_prbs: 25,
            prb_bandwidth_hz: 180_000.0,
            tx_power_per_prb_w: 0.8,
            noise_power_per_prb_dbm: -112.5,
            spectral_efficiency_cap: 5.55,
        }
    }
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        if self.total_prbs < 1 {
            return Err(Error::Config("total_prbs must be >= 1".into()));
        }
        if self.prb_bandwidth_hz <= 0.0 {
            return Err(Error::Config("prb_bandwidth_hz must be > 0".into()));
        }
        if self.tx_power_per_prb_w <= 0.0 {
            return Err(Error::Config("tx_power_per_prb_w must be > 0".into()));
        }
        if self.spectral_efficiency_cap <= 0.0 {
            return Err(Error::Config("spectral_efficiency_cap must be > 0".into()));
        }
        Ok(())
    }

    /// Noise power per PRB in watts.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_per_prb_dbm)
    }
}

/// Pinned per-PRB capacity, bypassing the SNR-based rate.
///
/// `shared` applies while both RATs transmit in the subframe, `alone`
/// when the user's RAT has the subframe to itself. Only NR users
/// distinguish the two; LTE keeps its control overhead either way.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityOverride {
    pub shared_bits_per_prb: f64,
    pub alone_bits_per_prb: f64,
}

impl CapacityOverride {
    pub fn flat(bits_per_prb: f64) -> Self {
        Self {
            shared_bits_per_prb: bits_per_prb,
            alone_bits_per_prb: bits_per_prb,
        }
    }
}

/// Traffic, QoS and link configuration of one user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserConfig {
    pub user_id: usize,
    pub rat: Rat,
    /// Traffic arrival period in subframes.
    pub arrival_period: usize,
    /// Packet size in bits.
    pub packet_bits: f64,
    /// Subframe of the first arrival.
    pub first_arrival: usize,
    /// Step delay of the delay-weight function, in subframes.
    pub step_delay: usize,
    /// Step weight added once the step delay is exceeded.
    pub step_weight: f64,
    /// Slope of the delay-weight function per subframe of waiting.
    pub weight_slope: f64,
    /// Distance to the base station in meters.
    pub distance_m: f64,
    /// Optional pinned capacity, see [`CapacityOverride`].
    pub bits_per_prb_override: Option<CapacityOverride>,
}

impl UserConfig {
    pub fn validate(&self) -> Result<()> {
        if self.arrival_period < 1 {
            return Err(Error::Config(format!(
                "user {}: arrival_period must be >= 1",
                self.user_id
            )));
        }
        if self.packet_bits < 0.0 {
            return Err(Error::Config(format!(
                "user {}: packet_bits must be >= 0",
                self.user_id
            )));
        }
        if self.step_delay < 1 {
            return Err(Error::Config(format!(
                "user {}: step_delay must be >= 1",
                self.user_id
            )));
        }
        if self.step_weight < 0.0 {
            return Err(Error::Config(format!(
                "user {}: step_weight must be >= 0",
                self.user_id
            )));
        }
        if self.weight_slope <= 0.0 {
            return Err(Error::Config(format!(
                "user {}: weight_slope must be > 0",
                self.user_id
            )));
        }
        Ok(())
    }
}

/// Link conditions of one user in one subframe, as seen by the capacity
/// model. `lte_active` states whether LTE transmits in the subframe.
#[derive(Debug, Clone, Copy)]
pub struct LinkConditions {
    pub mbsfn: bool,
    pub interfered: bool,
    pub lte_active: bool,
    pub fading_gain: f64,
}

impl LinkConditions {
    pub fn clear() -> Self {
        Self {
            mbsfn: false,
            interfered: false,
            lte_active: true,
            fading_gain: 1.0,
        }
    }
}

/// Path loss in dB at `distance_m` meters (urban macro, 3.5 GHz band).
pub fn path_loss_db(distance_m: f64) -> Result<f64> {
    if !(distance_m >= 1.0) {
        return Err(Error::Domain(format!(
            "path loss model is invalid below 1 m (d = {distance_m})"
        )));
    }
    Ok(20.4 + 37.6 * distance_m.log10())
}

/// Linear SNR from per-PRB transmit power, fading gain, path loss and
/// per-PRB noise power in watts.
pub fn snr_linear(
    tx_power_per_prb_w: f64,
    fading_gain: f64,
    path_loss_db: f64,
    noise_power_w: f64,
) -> Result<f64> {
    if tx_power_per_prb_w < 0.0 || fading_gain < 0.0 {
        return Err(Error::Domain("power and fading gain must be nonnegative".into()));
    }
    if noise_power_w <= 0.0 {
        return Err(Error::Domain("noise power must be > 0".into()));
    }
    let channel_gain = fading_gain * 10f64.powf(-path_loss_db / 10.0);
    Ok(tx_power_per_prb_w * channel_gain / noise_power_w)
}

/// Achievable rate in bits/s over `prbs` resource blocks at a common
/// per-PRB SNR, with the spectral efficiency capped.
pub fn achievable_rate_bps(prbs: usize, snr: f64, prb_bandwidth_hz: f64, efficiency_cap: f64) -> f64 {
    let eff = (1.0 + snr).log2().min(efficiency_cap);
    prbs as f64 * prb_bandwidth_hz * eff
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Bits one PRB carries for `user` in one subframe under `link`.
///
/// Returns 0 for an LTE user in an MBSFN subframe and for any user in an
/// interfered subframe. Otherwise the pinned override applies when the
/// scenario sets one; the fallback is the SNR-based rate times the
/// subframe duration and the data-symbol fraction.
pub fn bits_per_prb(user: &UserConfig, radio: &RadioParams, link: &LinkConditions) -> Result<f64> {
    if user.rat == Rat::Lte && link.mbsfn {
        return Ok(0.0);
    }
    if link.interfered {
        return Ok(0.0);
    }
    if let Some(ov) = &user.bits_per_prb_override {
        let v = match user.rat {
            Rat::Lte => ov.shared_bits_per_prb,
            Rat::Nr => {
                if link.lte_active {
                    ov.shared_bits_per_prb
                } else {
                    ov.alone_bits_per_prb
                }
            }
        };
        return Ok(v);
    }
    let data_symbols = match user.rat {
        Rat::Lte => LTE_DATA_SYMBOLS,
        Rat::Nr => {
            if link.lte_active {
                NR_DATA_SYMBOLS_SHARED
            } else {
                NR_DATA_SYMBOLS_ALONE
            }
        }
    };
    let loss = path_loss_db(user.distance_m)?;
    let snr = snr_linear(
        radio.tx_power_per_prb_w,
        link.fading_gain,
        loss,
        radio.noise_power_w(),
    )?;
    let rate = achievable_rate_bps(1, snr, radio.prb_bandwidth_hz, radio.spectral_efficiency_cap);
    Ok(rate * SUBFRAME_SECONDS * data_symbols / SUBFRAME_SYMBOLS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nr_user() -> UserConfig {
        UserConfig {
            user_id: 0,
            rat: Rat::Nr,
            arrival_period: 4,
            packet_bits: 45_000.0,
            first_arrival: 0,
            step_delay: 3,
            step_weight: 5.0,
            weight_slope: 1e-5,
            distance_m: 100.0,
            bits_per_prb_override: None,
        }
    }

    #[test]
    fn path_loss_matches_model() {
        assert_eq!(path_loss_db(1.0).unwrap(), 20.4);
        assert!((path_loss_db(100.0).unwrap() - 95.6).abs() < 1e-12);
        assert!((path_loss_db(1000.0).unwrap() - 133.2).abs() < 1e-12);
    }

    #[test]
    fn path_loss_rejects_short_distances() {
        assert!(matches!(path_loss_db(0.5), Err(Error::Domain(_))));
        assert!(matches!(path_loss_db(f64::NAN), Err(Error::Domain(_))));
    }

    #[test]
    fn snr_zero_channel() {
        let n = dbm_to_watts(-112.5);
        assert_eq!(snr_linear(0.8, 0.0, 95.6, n).unwrap(), 0.0);
    }

    #[test]
    fn snr_at_100m_matches_db_arithmetic() {
        // 10 log10(0.8) - 95.6 + 112.5 = 45.93 dB.
        let n = dbm_to_watts(-112.5);
        let snr = snr_linear(0.8, 1.0, 95.6, n).unwrap();
        let expected = 10f64.powf(4.593);
        assert!((snr / expected - 1.0).abs() < 1e-3, "snr = {snr}");
    }

    #[test]
    fn snr_is_linear_in_power() {
        let n = dbm_to_watts(-112.5);
        let a = snr_linear(0.8, 1.0, 95.6, n).unwrap();
        let b = snr_linear(1.6, 1.0, 95.6, n).unwrap();
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rate_zero_prbs() {
        assert_eq!(achievable_rate_bps(0, 10.0, 180_000.0, 5.55), 0.0);
    }

    #[test]
    fn rate_unit_snr_one_prb() {
        // log2(2) = 1 bit/s/Hz over 180 kHz.
        assert!((achievable_rate_bps(1, 1.0, 180_000.0, 100.0) - 180_000.0).abs() < 1e-9);
    }

    #[test]
    fn rate_cap_binds_at_high_snr() {
        let snr = 3.91e4;
        assert!((1.0f64 + snr).log2() > 5.55);
        let r = achievable_rate_bps(1, snr, 180_000.0, 5.55);
        assert!((r - 999_000.0).abs() < 1e-9);
    }

    #[test]
    fn bits_per_prb_zero_in_mbsfn_for_lte() {
        let mut u = nr_user();
        u.rat = Rat::Lte;
        let link = LinkConditions {
            mbsfn: true,
            ..LinkConditions::clear()
        };
        assert_eq!(bits_per_prb(&u, &RadioParams::default(), &link).unwrap(), 0.0);
    }

    #[test]
    fn bits_per_prb_zero_when_interfered() {
        let u = nr_user();
        let link = LinkConditions {
            interfered: true,
            ..LinkConditions::clear()
        };
        assert_eq!(bits_per_prb(&u, &RadioParams::default(), &link).unwrap(), 0.0);
    }

    #[test]
    fn scenario4_transport_block_overrides() {
        // Full 25-PRB band: 14112 bits alone, 12576 when sharing with LTE.
        let mut u = nr_user();
        u.bits_per_prb_override = Some(CapacityOverride {
            shared_bits_per_prb: 12_576.0 / 25.0,
            alone_bits_per_prb: 14_112.0 / 25.0,
        });
        let radio = RadioParams::default();
        let alone = LinkConditions {
            lte_active: false,
            ..LinkConditions::clear()
        };
        let shared = LinkConditions::clear();
        let total_alone = 25.0 * bits_per_prb(&u, &radio, &alone).unwrap();
        let total_shared = 25.0 * bits_per_prb(&u, &radio, &shared).unwrap();
        assert!((total_alone - 14_112.0).abs() < 1e-9);
        assert!((total_shared - 12_576.0).abs() < 1e-9);
    }

    #[test]
    fn bits_per_prb_symbol_fractions() {
        // Physics path at 100 m: cap binds, so one PRB carries
        // 999 bits scaled by the data-symbol fraction.
        let radio = RadioParams::default();
        let mut nr = nr_user();
        nr.bits_per_prb_override = None;
        let mut lte = nr_user();
        lte.rat = Rat::Lte;
        lte.bits_per_prb_override = None;

        let shared = LinkConditions::clear();
        let alone = LinkConditions {
            lte_active: false,
            ..LinkConditions::clear()
        };
        let base = 999.0;
        assert!((bits_per_prb(&nr, &radio, &shared).unwrap() - base * 11.0 / 14.0).abs() < 1e-9);
        assert!((bits_per_prb(&nr, &radio, &alone).unwrap() - base * 13.0 / 14.0).abs() < 1e-9);
        assert!((bits_per_prb(&lte, &radio, &shared).unwrap() - base * 12.0 / 14.0).abs() < 1e-9);
        assert!((bits_per_prb(&lte, &radio, &alone).unwrap() - base * 12.0 / 14.0).abs() < 1e-9);
    }
}
