use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the sensitivity-based logistic rectifier model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarvestParams {
    /// Sensitivity threshold in watts; inputs at or below it harvest nothing.
    pub p0_w: f64,
    /// Saturation output power in watts.
    pub pmax_w: f64,
    /// Logistic steepness, per watt.
    pub tau: f64,
    /// Logistic offset.
    pub nu: f64,
}

impl Default for HarvestParams {
    /// Shipped defaults, not a fitted device model.
    ///
    /// `p0_w` is the -12 dBm sensitivity quoted for the Powercast P2110.
    /// `pmax_w`, `tau` and `nu` were picked so that a harvester 1 m from a
    /// 3 W transmitter (about 8.2 mW input) sits in the knee of the curve
    /// (about 5 mW out), the rectifier saturates near 10 mW, and inputs below
    /// the threshold, which occur beyond roughly 16 m, yield nothing.
    fn default() -> Self {
        Self {
            p0_w: 6.4e-5,
            pmax_w: 1.0e-2,
            tau: 274.0,
            nu: 2.0,
        }
    }
}

impl HarvestParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.p0_w >= 0.0
            && self.pmax_w > 0.0
            && self.tau > 0.0
            && self.p0_w.is_finite()
            && self.pmax_w.is_finite()
            && self.tau.is_finite()
            && self.nu.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid harvest parameters {self:?}")))
        }
    }
}

/// Harvested DC power for an RF input `p_in` (both in watts).
///
/// Evaluates
/// `[Pmax / e^(-tau P0 + nu) * ((1 + e^(-tau P0 + nu)) / (1 + e^(-tau p_in + nu)) - 1)]^+`
/// in the algebraically equivalent form
/// `Pmax (1 - e^(-tau (p_in - P0))) / (1 + e^(-tau p_in + nu))`, which avoids
/// overflow for large `nu` and cancellation near saturation.
pub fn harvested_power_w(p_in: f64, hp: &HarvestParams) -> f64 {
    if !(p_in > hp.p0_w) {
        return 0.0;
    }
    let numer = -(-hp.tau * (p_in - hp.p0_w)).exp_m1();
    let denom = 1.0 + (-hp.tau * p_in + hp.nu).exp();
    (hp.pmax_w * numer / denom).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct transcription of the logistic formula, bracket and all.
    fn literal(p_in: f64, hp: &HarvestParams) -> f64 {
        let e0 = (-hp.tau * hp.p0_w + hp.nu).exp();
        let ein = (-hp.tau * p_in + hp.nu).exp();
        (hp.pmax_w / e0 * ((1.0 + e0) / (1.0 + ein) - 1.0)).max(0.0)
    }

    #[test]
    fn matches_literal_formula() {
        let hp = HarvestParams::default();
        for i in 0..200 {
            let p = i as f64 * 1e-4;
            let a = harvested_power_w(p, &hp);
            let b = literal(p, &hp);
            assert!((a - b).abs() <= 1e-12 + 1e-9 * b.abs(), "p={p} {a} {b}");
        }
    }

    #[test]
    fn zero_at_and_below_threshold() {
        let hp = HarvestParams::default();
        assert_eq!(harvested_power_w(hp.p0_w, &hp), 0.0);
        assert_eq!(harvested_power_w(0.0, &hp), 0.0);
        assert_eq!(harvested_power_w(hp.p0_w * 0.5, &hp), 0.0);
    }

    #[test]
    fn saturates_below_pmax() {
        let hp = HarvestParams::default();
        let big = harvested_power_w(10.0, &hp);
        assert!(big <= hp.pmax_w);
        assert!(hp.pmax_w - big < 1e-6 * hp.pmax_w);
    }

    #[test]
    fn default_is_in_the_knee_at_one_meter() {
        let hp = HarvestParams::default();
        let out = harvested_power_w(8.21e-3, &hp);
        assert!(out > 1e-3 && out < hp.pmax_w, "{out}");
        // nonlinear: efficiency differs across input levels
        let eff_lo = harvested_power_w(1e-3, &hp) / 1e-3;
        let eff_hi = harvested_power_w(2e-2, &hp) / 2e-2;
        assert!((eff_lo - eff_hi).abs() > 0.05);
    }

    #[test]
    fn validation() {
        assert!(HarvestParams::default().validate().is_ok());
        let bad = HarvestParams { tau: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
