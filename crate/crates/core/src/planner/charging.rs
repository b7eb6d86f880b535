use serde::{Deserialize, Serialize};

use super::simplex::{LinearProgram, Relation};
use crate::anchors::Anchor;
use crate::error::{Error, Result};
use crate::models::{
    harvested_power_w, received_power_w, ChannelParams, Codebook, EnergyHarvester, HarvestParams, Position2D,
};

/// Dwell times `t[beam][anchor]` in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChargingSchedule {
    pub t: Vec<Vec<f64>>,
}

impl ChargingSchedule {
    pub fn zeros(beams: usize, anchors: usize) -> Self {
        Self {
            t: vec![vec![0.0; anchors]; beams],
        }
    }

    pub fn beams(&self) -> usize {
        self.t.len()
    }

    pub fn anchors(&self) -> usize {
        self.t.first().map_or(0, Vec::len)
    }

    pub fn total(&self) -> f64 {
        self.t.iter().flatten().sum()
    }

    /// Total dwell at one anchor across beams.
    pub fn at_anchor(&self, m: usize) -> f64 {
        self.t.iter().map(|row| row[m]).sum()
    }
}

/// Harvested DC power `yield_w[anchor][beam][harvester]` for every candidate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct HarvestTable {
    pub yield_w: Vec<Vec<Vec<f64>>>,
}

pub fn harvest_table(
    anchors: &[Position2D],
    codebook: &Codebook,
    ehs: &[EnergyHarvester],
    channel: &ChannelParams,
    harvest: &HarvestParams,
) -> HarvestTable {
    let yield_w = anchors
        .iter()
        .map(|&a| {
            codebook
                .sectors
                .iter()
                .map(|s| {
                    ehs.iter()
                        .map(|e| harvested_power_w(received_power_w(channel, s, a, e.position), harvest))
                        .collect()
                })
                .collect()
        })
        .collect();
    HarvestTable { yield_w }
}

impl HarvestTable {
    pub fn anchors(&self) -> usize {
        self.yield_w.len()
    }

    pub fn beams(&self) -> usize {
        self.yield_w.first().map_or(0, Vec::len)
    }

    /// Harvesters with no positive-yield (anchor, beam) pair among the selected anchors.
    pub fn uncovered(&self, selection: &[bool]) -> Vec<usize> {
        let k = self.yield_w.first().and_then(|b| b.first()).map_or(0, Vec::len);
        (0..k)
            .filter(|&e| {
                !self
                    .yield_w
                    .iter()
                    .zip(selection)
                    .filter(|(_, &on)| on)
                    .any(|(beams, _)| beams.iter().any(|y| y[e] > 0.0))
            })
            .collect()
    }

    /// Energy each harvester collects under `schedule`, in joules.
    pub fn delivered(&self, schedule: &ChargingSchedule) -> Vec<f64> {
        let k = self.yield_w.first().and_then(|b| b.first()).map_or(0, Vec::len);
        let mut e = vec![0.0; k];
        for (m, beams) in self.yield_w.iter().enumerate() {
            for (n, y) in beams.iter().enumerate() {
                let t = schedule.t[n][m];
                if t > 0.0 {
                    for (acc, yk) in e.iter_mut().zip(y) {
                        *acc += t * yk;
                    }
                }
            }
        }
        e
    }

    /// Minimum total dwell meeting every requirement using only selected anchors.
    pub fn allocate(&self, selection: &[bool], ehs: &[EnergyHarvester]) -> Result<ChargingSchedule> {
        let (m_count, n_count) = (self.anchors(), self.beams());
        if selection.len() != m_count {
            return Err(Error::DimensionMismatch { expected: m_count, got: selection.len() });
        }
        if !selection.iter().any(|&v| v) {
            return Err(Error::InvalidInput("empty selection".into()));
        }
        let mut schedule = ChargingSchedule::zeros(n_count, m_count);
        if ehs.is_empty() {
            return Ok(schedule);
        }
        let missing = self.uncovered(selection);
        if !missing.is_empty() {
            return Err(Error::Infeasible { ehs: missing });
        }
        // one column per selected (anchor, beam) pair that reaches anybody
        let cols: Vec<(usize, usize)> = (0..m_count)
            .filter(|&m| selection[m])
            .flat_map(|m| (0..n_count).map(move |n| (m, n)))
            .filter(|&(m, n)| self.yield_w[m][n].iter().any(|&y| y > 0.0))
            .collect();
        let mut lp = LinearProgram::new(vec![1.0; cols.len()]);
        for (k, eh) in ehs.iter().enumerate() {
            // normalized so the right-hand side is 1
            let row = cols.iter().map(|&(m, n)| self.yield_w[m][n][k] / eh.requirement_j).collect();
            lp.add(row, Relation::Ge, 1.0);
        }
        let sol = lp.solve()?;
        for (&(m, n), &t) in cols.iter().zip(&sol.x) {
            schedule.t[n][m] = t.max(0.0);
        }
        // lift rounding shortfalls so every requirement holds exactly
        let got = self.delivered(&schedule);
        let lift = ehs
            .iter()
            .zip(&got)
            .map(|(e, &g)| if g > 0.0 { e.requirement_j / g } else { f64::INFINITY })
            .fold(1.0, f64::max);
        if lift > 1.0 {
            let lift = lift * (1.0 + 4.0 * f64::EPSILON);
            schedule.t.iter_mut().flatten().for_each(|t| *t *= lift);
        }
        Ok(schedule)
    }
}

/// Minimum-total-time dwell schedule over the selected anchors' beams.
///
/// Fails with [`Error::Infeasible`] naming every harvester that no selected
/// (anchor, beam) pair can charge.
pub fn allocate_charging(
    anchors: &[Anchor],
    selection: &[bool],
    codebook: &Codebook,
    ehs: &[EnergyHarvester],
    channel: &ChannelParams,
    harvest: &HarvestParams,
) -> Result<ChargingSchedule> {
    let positions: Vec<Position2D> = anchors.iter().map(|a| a.position).collect();
    harvest_table(&positions, codebook, ehs, channel, harvest).allocate(selection, ehs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(y: Vec<Vec<Vec<f64>>>) -> HarvestTable {
        HarvestTable { yield_w: y }
    }

    #[test]
    fn single_pair_divides_requirement_by_yield() {
        let t = table(vec![vec![vec![1e-3]]]);
        let s = t.allocate(&[true], &[EnergyHarvester::new(0.0, 0.0, 0.02)]).unwrap();
        assert!((s.t[0][0] - 20.0).abs() < 1e-9);
    }

    #[test]
    fn mass_goes_to_the_stronger_pair() {
        // one harvester, two anchors with 1 mW and 2 mW
        let t = table(vec![vec![vec![1e-3]], vec![vec![2e-3]]]);
        let s = t.allocate(&[true, true], &[EnergyHarvester::new(0.0, 0.0, 0.02)]).unwrap();
        assert!(s.t[0][0].abs() < 1e-9);
        assert!((s.t[0][1] - 10.0).abs() < 1e-9);
        assert!((s.total() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_harvester_is_reported() {
        let t = table(vec![vec![vec![1e-3, 0.0, 0.0]]]);
        let ehs = vec![EnergyHarvester::new(0.0, 0.0, 0.02); 3];
        assert_eq!(t.allocate(&[true], &ehs), Err(Error::Infeasible { ehs: vec![1, 2] }));
    }

    #[test]
    fn unselected_anchors_get_no_time() {
        let t = table(vec![vec![vec![5e-3]], vec![vec![1e-3]]]);
        let s = t.allocate(&[false, true], &[EnergyHarvester::new(0.0, 0.0, 0.02)]).unwrap();
        assert_eq!(s.t[0][0], 0.0);
        assert!((s.t[0][1] - 20.0).abs() < 1e-9);
    }

    #[test]
    fn requirements_hold_after_rounding() {
        let t = table(vec![vec![vec![1.3e-3, 0.7e-3], vec![0.1e-3, 2.9e-3]], vec![vec![0.9e-3, 0.9e-3], vec![0.0, 0.0]]]);
        let ehs = vec![EnergyHarvester::new(0.0, 0.0, 0.02), EnergyHarvester::new(0.0, 0.0, 0.03)];
        let s = t.allocate(&[true, true], &ehs).unwrap();
        let got = t.delivered(&s);
        assert!(got[0] >= 0.02 && got[1] >= 0.03, "{got:?}");
    }
}
