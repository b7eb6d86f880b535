//! Candidate anchor generation: cluster the harvesters, then place one
//! anchor per cluster at its (beam-constrained) Chebyshev center.

mod chebyshev;
mod dbscan;

pub use chebyshev::{beam_constrained_center, chebyshev_center, max_distance, BeamPlacement, Circle};
pub use dbscan::{dbscan, Cluster, Clustering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Codebook, EnergyHarvester, Position2D, Vec2};

/// A candidate stopping point for the robot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub position: Position2D,
    pub cluster: Cluster,
    /// Beam that covers every cluster member, when placement was beam-constrained.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feasible_beam: Option<usize>,
    /// Largest distance from the anchor to a cluster member.
    pub radius: f64,
}

/// Clustering and placement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        Self { eps: 3.0, min_pts: 2 }
    }
}

/// DBSCAN clusters (in discovery order) followed by one singleton cluster per
/// outlier (by harvester index), each mapped to an anchor.
///
/// With `beam_width_deg >= 360` anchors sit at plain Chebyshev centers;
/// otherwise the beam-constrained center is used. A cluster no beam can cover
/// is split along its principal axis and retried, at most `log2(size)` levels deep.
pub fn generate_anchors(
    ehs: &[EnergyHarvester],
    clustering: &ClusteringParams,
    codebook: &Codebook,
    beam_width_deg: f64,
) -> Result<Vec<Anchor>> {
    if ehs.is_empty() {
        return Err(Error::InvalidInput("no energy harvesters".into()));
    }
    codebook.validate()?;
    let points: Vec<Position2D> = ehs.iter().map(|e| e.position).collect();
    let found = dbscan(&points, clustering.eps, clustering.min_pts)?;
    let mut clusters = found.clusters;
    clusters.extend(found.outliers.into_iter().map(|i| Cluster {
        members: vec![i],
        is_outlier_singleton: true,
    }));

    let mut anchors = Vec::with_capacity(clusters.len());
    for cluster in clusters {
        let depth = usize::BITS - cluster.members.len().leading_zeros() - 1;
        place(&points, cluster, codebook, beam_width_deg, depth as usize, &mut anchors)?;
    }
    Ok(anchors)
}

fn place(
    points: &[Position2D],
    cluster: Cluster,
    codebook: &Codebook,
    beam_width_deg: f64,
    splits_left: usize,
    out: &mut Vec<Anchor>,
) -> Result<()> {
    let pts: Vec<Position2D> = cluster.members.iter().map(|&i| points[i]).collect();
    if beam_width_deg >= 360.0 {
        let c = chebyshev_center(&pts)?;
        out.push(Anchor {
            position: c.center,
            cluster,
            feasible_beam: None,
            radius: c.radius,
        });
        return Ok(());
    }
    match beam_constrained_center(&pts, codebook) {
        Ok(b) => {
            out.push(Anchor {
                position: b.center,
                cluster,
                feasible_beam: Some(b.beam),
                radius: b.radius,
            });
            Ok(())
        }
        Err(Error::FeasibleBeamNotFound { .. }) if splits_left > 0 && cluster.members.len() > 1 => {
            let (a, b) = bisect(points, &cluster);
            place(points, a, codebook, beam_width_deg, splits_left - 1, out)?;
            place(points, b, codebook, beam_width_deg, splits_left - 1, out)
        }
        Err(Error::FeasibleBeamNotFound { .. }) => Err(Error::FeasibleBeamNotFound {
            members: cluster.members,
        }),
        Err(e) => Err(e),
    }
}

/// Splits a cluster in half by projection onto its principal axis.
pub fn bisect(points: &[Position2D], cluster: &Cluster) -> (Cluster, Cluster) {
    let n = cluster.members.len() as f64;
    let mean = cluster
        .members
        .iter()
        .fold(Vec2::ZERO, |acc, &i| acc + points[i])
        * (1.0 / n);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &i in &cluster.members {
        let d = points[i] - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
    }
    // major eigenvector of the 2x2 scatter matrix
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let axis = Vec2::new(theta.cos(), theta.sin());
    let mut order = cluster.members.clone();
    order.sort_by(|&a, &b| {
        (points[a] - mean)
            .dot(axis)
            .total_cmp(&(points[b] - mean).dot(axis))
            .then(a.cmp(&b))
    });
    let mut right = order.split_off(order.len() / 2);
    let mut left = order;
    left.sort_unstable();
    right.sort_unstable();
    let mk = |members| Cluster {
        members,
        is_outlier_singleton: false,
    };
    (mk(left), mk(right))
}
