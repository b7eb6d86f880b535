use crate::models::{harvested_power_w, received_power_w, ChannelParams, Codebook, EnergyHarvester, HarvestParams, Position2D};

/// What a stationary transmitter can deliver to each harvester.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedTransmitterReport {
    /// Best-beam harvested power per harvester, watts.
    pub harvested_w: Vec<f64>,
    /// Beam achieving it, `None` if no beam yields anything.
    pub best_beam: Vec<Option<usize>>,
    /// Harvesters stuck below the sensitivity threshold.
    pub flagged: Vec<usize>,
    pub feasible: bool,
}

/// Evaluates charging every harvester from one fixed position by rotating through the codebook.
pub fn fixed_transmitter_check(
    tx_pos: Position2D,
    ehs: &[EnergyHarvester],
    codebook: &Codebook,
    channel: &ChannelParams,
    harvest: &HarvestParams,
) -> FixedTransmitterReport {
    let mut harvested_w = Vec::with_capacity(ehs.len());
    let mut best_beam = Vec::with_capacity(ehs.len());
    for e in ehs {
        let mut best: Option<(usize, f64)> = None;
        for (n, s) in codebook.sectors.iter().enumerate() {
            let y = harvested_power_w(received_power_w(channel, s, tx_pos, e.position), harvest);
            if y > 0.0 && best.is_none_or(|(_, b)| y > b) {
                best = Some((n, y));
            }
        }
        harvested_w.push(best.map_or(0.0, |b| b.1));
        best_beam.push(best.map(|b| b.0));
    }
    let flagged: Vec<usize> = (0..ehs.len()).filter(|&k| best_beam[k].is_none()).collect();
    FixedTransmitterReport {
        feasible: flagged.is_empty(),
        harvested_w,
        best_beam,
        flagged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_harvester_is_served_far_one_is_flagged() {
        let ehs = [EnergyHarvester::new(1.0, 0.0, 0.02), EnergyHarvester::new(40.0, 0.0, 0.02)];
        let r = fixed_transmitter_check(
            Position2D::ZERO,
            &ehs,
            &Codebook::three_sector(),
            &ChannelParams::default(),
            &HarvestParams::default(),
        );
        assert!(r.harvested_w[0] > 0.0);
        assert_eq!(r.best_beam[0], Some(0));
        assert_eq!(r.flagged, vec![1]);
        assert!(!r.feasible);
    }

    #[test]
    fn no_harvesters_is_feasible() {
        let r = fixed_transmitter_check(
            Position2D::ZERO,
            &[],
            &Codebook::three_sector(),
            &ChannelParams::default(),
            &HarvestParams::default(),
        );
        assert!(r.feasible);
    }
}
