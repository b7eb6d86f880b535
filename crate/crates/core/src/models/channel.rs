use serde::{Deserialize, Serialize};

use super::beam::{beam_covers, BeamSector};
use super::geometry::Position2D;
use crate::error::{Error, Result};

/// Near-field clamp for the pathloss formula, which diverges at zero range.
pub const MIN_DISTANCE_M: f64 = 0.1;

/// Transmitter and receiver parameters of the RF link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Carrier frequency in GHz.
    pub fc_ghz: f64,
    /// Transmit power in watts, transmit antenna gain included.
    pub tx_power_w: f64,
    /// Receive antenna gain in dB.
    pub rx_gain_db: f64,
}

impl Default for ChannelParams {
    /// Powercast TX91501 at 915 MHz into a P2110 receiver.
    fn default() -> Self {
        Self {
            fc_ghz: 0.915,
            tx_power_w: 3.0,
            rx_gain_db: 6.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.fc_ghz > 0.0 && self.fc_ghz.is_finite()) {
            return Err(Error::InvalidInput(format!("fc_ghz must be > 0, got {}", self.fc_ghz)));
        }
        if !(self.tx_power_w >= 0.0 && self.tx_power_w.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "tx_power_w must be >= 0, got {}",
                self.tx_power_w
            )));
        }
        if !self.rx_gain_db.is_finite() {
            return Err(Error::InvalidInput("rx_gain_db must be finite".into()));
        }
        Ok(())
    }
}

/// Indoor-office pathloss in dB: `32.4 + 17.3 log10(d) + 20 log10(fc_ghz)`.
///
/// Ranges below [`MIN_DISTANCE_M`] are clamped. The channel gain in dB is the
/// negation of the returned value.
pub fn pathloss_db(eh: Position2D, anchor: Position2D, fc_ghz: f64) -> f64 {
    let d = eh.distance(anchor).max(MIN_DISTANCE_M);
    32.4 + 17.3 * d.log10() + 20.0 * fc_ghz.log10()
}

/// RF power arriving at the harvester when the transmitter at `anchor` uses `sector`.
///
/// Zero when the harvester lies outside the sector.
pub fn received_power_w(
    params: &ChannelParams,
    sector: &BeamSector,
    anchor: Position2D,
    eh: Position2D,
) -> f64 {
    if !beam_covers(sector, anchor, eh) {
        return 0.0;
    }
    let gain_db = -pathloss_db(eh, anchor, params.fc_ghz) + params.rx_gain_db;
    params.tx_power_w * 10f64.powf(gain_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(x: f64, y: f64) -> Position2D {
        Position2D::new(x, y)
    }

    #[test]
    fn one_meter_at_915_mhz() {
        let pl = pathloss_db(at(1.0, 0.0), at(0.0, 0.0), 0.915);
        assert!((pl - 31.6284).abs() < 1e-3, "{pl}");
    }

    #[test]
    fn log_terms_vanish_at_one_meter_one_ghz() {
        assert!((pathloss_db(at(0.0, 1.0), at(0.0, 0.0), 1.0) - 32.4).abs() < 1e-12);
    }

    #[test]
    fn one_decade_adds_17_3_db() {
        let pl = pathloss_db(at(10.0, 0.0), at(0.0, 0.0), 0.915);
        assert!((pl - 48.9284).abs() < 1e-3, "{pl}");
    }

    #[test]
    fn near_field_is_clamped() {
        let a = pathloss_db(at(0.0, 0.0), at(0.0, 0.0), 0.915);
        let b = pathloss_db(at(MIN_DISTANCE_M, 0.0), at(0.0, 0.0), 0.915);
        assert!(a.is_finite());
        assert_eq!(a, b);
    }

    #[test]
    fn received_power_in_and_out_of_beam() {
        let p = ChannelParams::default();
        let sector = BeamSector::new(-65.0, 130.0);
        let w = received_power_w(&p, &sector, at(0.0, 0.0), at(1.0, 0.0));
        // 10 log10(3000 mW) - 31.6284 + 6 = 9.14 dBm
        let dbm = 10.0 * (w * 1e3).log10();
        assert!((dbm - 9.1428).abs() < 1e-3, "{dbm}");
        assert!((w - 8.21e-3).abs() < 1e-5, "{w}");
        assert_eq!(received_power_w(&p, &sector, at(0.0, 0.0), at(0.0, 1.0)), 0.0);
        let off = ChannelParams { tx_power_w: 0.0, ..p };
        assert_eq!(received_power_w(&off, &sector, at(0.0, 0.0), at(1.0, 0.0)), 0.0);
    }

    #[test]
    fn validation() {
        assert!(ChannelParams::default().validate().is_ok());
        let bad = ChannelParams { fc_ghz: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
