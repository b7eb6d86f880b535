use serde::{Deserialize, Serialize};

use super::geometry::{normalize_deg, Position2D};
use crate::error::{Error, Result};

/// Absolute angular interval `[start, start + width]` in degrees, boundaries inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamSector {
    pub start_deg: f64,
    pub width_deg: f64,
}

impl BeamSector {
    /// Builds a sector; `start_deg` is wrapped into `[0, 360)`.
    pub fn new(start_deg: f64, width_deg: f64) -> Self {
        Self {
            start_deg: normalize_deg(start_deg),
            width_deg,
        }
    }

    /// Direction the robot faces to realize this beam.
    pub fn center_deg(&self) -> f64 {
        normalize_deg(self.start_deg + self.width_deg / 2.0)
    }

    pub fn end_deg(&self) -> f64 {
        self.start_deg + self.width_deg
    }

    pub fn is_omni(&self) -> bool {
        self.width_deg >= 360.0
    }

    /// Whether the direction `angle_deg` falls inside the sector.
    pub fn contains_angle(&self, angle_deg: f64) -> bool {
        if self.is_omni() {
            return true;
        }
        let rel = normalize_deg(angle_deg - normalize_deg(self.start_deg));
        // ties favor coverage; also accept `rel` just below 360 that is numerically the start edge
        rel <= self.width_deg + 1e-9 || 360.0 - rel <= 1e-9
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_deg > 0.0 && self.width_deg <= 360.0) || !self.start_deg.is_finite() {
            return Err(Error::InvalidInput(format!(
                "beam width must lie in (0, 360], got {}",
                self.width_deg
            )));
        }
        Ok(())
    }
}

/// Ordered, nonempty set of beam sectors realizable by rotating the robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub sectors: Vec<BeamSector>,
}

impl Default for Codebook {
    fn default() -> Self {
        Self::three_sector()
    }
}

impl Codebook {
    pub fn new(sectors: Vec<BeamSector>) -> Result<Self> {
        let cb = Self { sectors };
        cb.validate()?;
        Ok(cb)
    }

    /// The three 130° patterns of the TX9150x directional antenna.
    pub fn three_sector() -> Self {
        Self {
            sectors: vec![
                BeamSector::new(-65.0, 130.0),
                BeamSector::new(55.0, 130.0),
                BeamSector::new(175.0, 130.0),
            ],
        }
    }

    /// A single omnidirectional pattern.
    pub fn omni() -> Self {
        Self {
            sectors: vec![BeamSector::new(0.0, 360.0)],
        }
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    /// Widest sector in the codebook.
    pub fn beam_width_deg(&self) -> f64 {
        self.sectors.iter().map(|s| s.width_deg).fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sectors.is_empty() {
            return Err(Error::InvalidInput("codebook must contain at least one sector".into()));
        }
        self.sectors.iter().try_for_each(BeamSector::validate)
    }
}

/// Beam indicator: true iff the direction from `anchor` to `eh` lies inside `sector`.
///
/// A harvester exactly at the anchor counts as covered.
pub fn beam_covers(sector: &BeamSector, anchor: Position2D, eh: Position2D) -> bool {
    let d = eh - anchor;
    if d.x == 0.0 && d.y == 0.0 {
        return true;
    }
    sector.contains_angle(d.angle_deg())
}
