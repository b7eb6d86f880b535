use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::Position2D;

/// A group of harvesters served from one anchor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    /// Harvester indices, ascending.
    pub members: Vec<usize>,
    /// True for the one-member clusters made from DBSCAN noise points.
    #[serde(default)]
    pub is_outlier_singleton: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    pub outliers: Vec<usize>,
}

/// Density-based clustering.
///
/// A point is a core point when at least `min_pts` points, itself included,
/// lie within `eps` of it. Clusters are the connected components of the core
/// points under the `eps`-neighborhood relation, plus the border points
/// reachable from them; a border point joins the first cluster (in order of
/// its lowest core index) that reaches it. Everything else is an outlier.
pub fn dbscan(points: &[Position2D], eps: f64, min_pts: usize) -> Result<Clustering> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("eps must be > 0, got {eps}")));
    }
    if min_pts == 0 {
        return Err(Error::InvalidInput("min_pts must be >= 1".into()));
    }
    let n = points.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n).filter(|&j| points[i].distance(points[j]) <= eps).collect())
        .collect();
    let is_core: Vec<bool> = neighbors.iter().map(|nb| nb.len() >= min_pts).collect();

    let mut label: Vec<Option<usize>> = vec![None; n];
    let mut clusters = Vec::new();
    for seed in 0..n {
        if !is_core[seed] || label[seed].is_some() {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([seed]);
        label[seed] = Some(id);
        while let Some(p) = queue.pop_front() {
            members.push(p);
            if !is_core[p] {
                continue;
            }
            for &q in &neighbors[p] {
                if label[q].is_none() {
                    label[q] = Some(id);
                    queue.push_back(q);
                }
            }
        }
        members.sort_unstable();
        clusters.push(Cluster {
            members,
            is_outlier_singleton: false,
        });
    }
    let outliers = (0..n).filter(|&i| label[i].is_none()).collect();
    Ok(Clustering { clusters, outliers })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_far_blobs() {
        let mut pts = Vec::new();
        for i in 0..5 {
            pts.push(Position2D::new(i as f64 * 0.5, 0.0));
            pts.push(Position2D::new(100.0 + i as f64 * 0.5, 0.0));
        }
        let c = dbscan(&pts, 5.0, 2).unwrap();
        assert_eq!(c.clusters.len(), 2);
        assert!(c.outliers.is_empty());
    }

    #[test]
    fn isolated_point_is_noise() {
        let c = dbscan(&[Position2D::new(1.0, 1.0)], 1.0, 2).unwrap();
        assert!(c.clusters.is_empty());
        assert_eq!(c.outliers, vec![0]);
        // with min_pts = 1 every point is core
        let c = dbscan(&[Position2D::new(1.0, 1.0)], 1.0, 1).unwrap();
        assert_eq!(c.clusters.len(), 1);
    }

    #[test]
    fn empty_input_and_bad_params() {
        assert_eq!(dbscan(&[], 1.0, 2).unwrap(), Clustering::default());
        assert!(dbscan(&[], 0.0, 2).is_err());
        assert!(dbscan(&[], 1.0, 0).is_err());
    }

    #[test]
    fn border_point_joins_but_does_not_extend() {
        // 0-1-2 dense chain, 3 is a border of 2 only, 4 is beyond 3
        let pts = [0.0, 0.5, 1.0, 1.9, 3.0].map(|x| Position2D::new(x, 0.0));
        let c = dbscan(&pts, 1.0, 3).unwrap();
        assert_eq!(c.clusters.len(), 1);
        assert_eq!(c.clusters[0].members, vec![0, 1, 2, 3]);
        assert_eq!(c.outliers, vec![4]);
    }
}
