use serde::{Deserialize, Serialize};

use super::geometry::Position2D;
use crate::error::{Error, Result};
use crate::planner::RouteMatrix;

/// Square matrix of travel lengths between anchors, in meters.
///
/// Entries are nonnegative and the diagonal is exactly zero. The matrix need
/// not be symmetric once it has been refit from measured traversal times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DistanceMatrix {
    d: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(d: Vec<Vec<f64>>) -> Result<Self> {
        let n = d.len();
        for (m, row) in d.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("D[{m}][{j}] = {v} is not >= 0")));
                }
                if m == j && v != 0.0 {
                    return Err(Error::InvalidInput(format!("D[{m}][{m}] = {v}, must be 0")));
                }
            }
        }
        Ok(Self { d })
    }

    /// Straight-line distances between `points`.
    pub fn euclidean(points: &[Position2D]) -> Self {
        let d = points
            .iter()
            .map(|a| points.iter().map(|b| a.distance(*b)).collect())
            .collect();
        Self { d }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    #[inline]
    pub fn get(&self, m: usize, j: usize) -> f64 {
        self.d[m][j]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.d
    }

    /// Every entry multiplied by `factor` (which must be nonnegative).
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor >= 0.0 && factor.is_finite()) {
            return Err(Error::InvalidInput(format!("scale factor {factor} must be >= 0")));
        }
        Ok(Self {
            d: self
                .d
                .iter()
                .map(|row| row.iter().map(|v| v * factor).collect())
                .collect(),
        })
    }
}

impl TryFrom<Vec<Vec<f64>>> for DistanceMatrix {
    type Error = Error;
    fn try_from(d: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(d)
    }
}

impl From<DistanceMatrix> for Vec<Vec<f64>> {
    fn from(m: DistanceMatrix) -> Self {
        m.d
    }
}

/// Kinematic limits of the WET robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Cruise speed in m/s.
    pub linear_speed: f64,
    /// Turn-in-place rate in deg/s.
    pub angular_speed: f64,
    pub body_radius: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            linear_speed: 0.2,
            angular_speed: 90.0,
            body_radius: 0.18,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        if self.linear_speed > 0.0 && self.angular_speed > 0.0 && self.body_radius > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("robot parameters must be positive: {self:?}")))
        }
    }
}

/// A device to be charged: its location and the energy it must receive, in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyHarvester {
    pub position: Position2D,
    pub requirement_j: f64,
}

impl EnergyHarvester {
    pub fn new(x: f64, y: f64, requirement_j: f64) -> Self {
        Self {
            position: Position2D::new(x, y),
            requirement_j,
        }
    }
}

/// Travel time of a route: `(1/alpha) * trace(D^T W)`.
pub fn motion_time_s(d: &DistanceMatrix, route: &RouteMatrix, alpha: f64) -> Result<f64> {
    if route.len() != d.len() {
        return Err(Error::DimensionMismatch { expected: d.len(), got: route.len() });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("speed must be > 0, got {alpha}")));
    }
    let mut total = 0.0;
    for (m, j) in route.edges() {
        total += d.get(m, j);
    }
    Ok(total / alpha)
}
