//! Global planning: which anchors to stop at, in what order, and how long to
//! dwell on each beam.
//!
//! The joint problem is decomposed. The outer layer searches over anchor
//! selections ([`PlanningProblem::joint_optimize`]); for each selection the
//! ring is solved exactly by branch-and-bound ([`solve_route`]) and the
//! charging times by linear programming ([`allocate_charging`]). A plan's cost
//! is motion time plus total dwell time ([`evaluate_plan`]).

mod charging;
mod fixed;
mod route;
mod search;
pub mod simplex;
mod tsp;

pub use charging::{allocate_charging, harvest_table, ChargingSchedule, HarvestTable};
pub use fixed::{fixed_transmitter_check, FixedTransmitterReport};
pub use route::{
    check_route_constraints, check_route_constraints_rooted, MtzSlack, RouteMatrix, SelectionVector, MTZ_BIG_J,
};
pub use search::{SearchBudget, SearchOutcome};
pub use tsp::{solve_route, solve_route_with_budget, RouteSolution, DEFAULT_NODE_BUDGET};

use serde::{Deserialize, Serialize};

use crate::anchors::Anchor;
use crate::error::{Error, Result};
use crate::models::{
    motion_time_s, ChannelParams, Codebook, DistanceMatrix, EnergyHarvester, HarvestParams, Position2D,
};

/// A complete charging mission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub anchors: Vec<Anchor>,
    pub selection: SelectionVector,
    pub route: RouteMatrix,
    /// Anchors in visiting order, starting at `start_anchor`; empty when nothing is selected.
    pub tour: Vec<usize>,
    pub schedule: ChargingSchedule,
    pub start_anchor: usize,
    pub motion_s: f64,
    pub charging_s: f64,
    pub planned_completion_s: f64,
    /// False if the route search hit its node budget.
    pub route_optimal: bool,
}

impl Plan {
    /// A plan that selects nothing and does nothing.
    pub fn empty(anchors: Vec<Anchor>, beams: usize) -> Self {
        let m = anchors.len();
        Self {
            selection: vec![false; m],
            route: RouteMatrix::empty(m),
            tour: Vec::new(),
            schedule: ChargingSchedule::zeros(beams, m),
            start_anchor: 0,
            motion_s: 0.0,
            charging_s: 0.0,
            planned_completion_s: 0.0,
            route_optimal: true,
            anchors,
        }
    }

    pub fn selected(&self) -> Vec<usize> {
        (0..self.selection.len()).filter(|&m| self.selection[m]).collect()
    }

    /// Length of the planned ring under `d`, in meters.
    pub fn route_length(&self, d: &DistanceMatrix) -> f64 {
        self.route.edges().map(|(m, j)| d.get(m, j)).sum()
    }

    /// Checks dimensions, the ring constraints, and zero dwell at unselected anchors.
    pub fn validate_structure(&self) -> Result<()> {
        let m = self.anchors.len();
        if self.selection.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.selection.len() });
        }
        if self.route.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.route.len() });
        }
        if self.schedule.anchors() != m {
            return Err(Error::DimensionMismatch { expected: m, got: self.schedule.anchors() });
        }
        if let Some(&bad) = self.tour.iter().find(|&&a| a >= m) {
            return Err(Error::UnknownAnchor(bad));
        }
        if self.tour.is_empty() {
            if self.selection.iter().any(|&v| v) || self.route.edge_count() > 0 {
                return Err(Error::InvalidInput("plan selects anchors but has no tour".into()));
            }
            return Ok(());
        }
        if self.start_anchor >= m {
            return Err(Error::UnknownAnchor(self.start_anchor));
        }
        let slack = MtzSlack::for_route(&self.selection, &self.route, self.start_anchor)
            .ok_or_else(|| Error::InvalidInput("route is not a single ring over the selection".into()))?;
        if !check_route_constraints_rooted(&self.selection, &self.route, &slack.lambda, self.start_anchor) {
            return Err(Error::InvalidInput("route violates the ring constraints".into()));
        }
        if self.route.tour_from(self.start_anchor).as_deref() != Some(&self.tour[..]) {
            return Err(Error::InvalidInput("tour disagrees with route matrix".into()));
        }
        for (n, row) in self.schedule.t.iter().enumerate() {
            for (a, &t) in row.iter().enumerate() {
                if !(t >= 0.0) || (!self.selection[a] && t != 0.0) {
                    return Err(Error::InvalidInput(format!("invalid dwell t[{n}][{a}] = {t}")));
                }
            }
        }
        Ok(())
    }
}

/// Motion time plus total dwell: `(1/alpha) tr(D^T W) + sum t`.
pub fn evaluate_plan(plan: &Plan, d: &DistanceMatrix, alpha: f64) -> Result<f64> {
    Ok(motion_time_s(d, &plan.route, alpha)? + plan.schedule.total())
}

/// Everything the planner needs, with the per-(anchor, beam, harvester)
/// harvested power precomputed.
#[derive(Debug, Clone)]
pub struct PlanningProblem {
    pub anchors: Vec<Anchor>,
    pub distances: DistanceMatrix,
    pub ehs: Vec<EnergyHarvester>,
    pub codebook: Codebook,
    pub channel: ChannelParams,
    pub harvest: HarvestParams,
    /// Robot cruise speed, m/s.
    pub alpha: f64,
    /// Anchor where the ring starts and ends; always selected.
    pub start_anchor: usize,
    table: HarvestTable,
}

impl PlanningProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        anchors: Vec<Anchor>,
        distances: DistanceMatrix,
        ehs: Vec<EnergyHarvester>,
        codebook: Codebook,
        channel: ChannelParams,
        harvest: HarvestParams,
        alpha: f64,
        start_anchor: usize,
    ) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::InvalidInput("no candidate anchors".into()));
        }
        if distances.len() != anchors.len() {
            return Err(Error::DimensionMismatch { expected: anchors.len(), got: distances.len() });
        }
        if start_anchor >= anchors.len() {
            return Err(Error::UnknownAnchor(start_anchor));
        }
        if !(alpha > 0.0) {
            return Err(Error::InvalidInput(format!("speed must be > 0, got {alpha}")));
        }
        if let Some(k) = ehs.iter().position(|e| !(e.requirement_j > 0.0)) {
            return Err(Error::InvalidInput(format!("harvester {k} needs a positive requirement")));
        }
        codebook.validate()?;
        channel.validate()?;
        harvest.validate()?;
        let positions: Vec<Position2D> = anchors.iter().map(|a| a.position).collect();
        let table = harvest_table(&positions, &codebook, &ehs, &channel, &harvest);
        Ok(Self {
            anchors,
            distances,
            ehs,
            codebook,
            channel,
            harvest,
            alpha,
            start_anchor,
            table,
        })
    }

    /// Same problem under a different distance matrix.
    pub fn with_distances(&self, distances: DistanceMatrix) -> Result<Self> {
        if distances.len() != self.anchors.len() {
            return Err(Error::DimensionMismatch { expected: self.anchors.len(), got: distances.len() });
        }
        Ok(Self {
            distances,
            ..self.clone()
        })
    }

    pub fn table(&self) -> &HarvestTable {
        &self.table
    }

    /// Index of the anchor closest to `p`; ties go to the lowest index.
    pub fn nearest_anchor(anchors: &[Anchor], p: Position2D) -> Option<usize> {
        (0..anchors.len()).min_by(|&a, &b| {
            anchors[a]
                .position
                .distance(p)
                .total_cmp(&anchors[b].position.distance(p))
                .then(a.cmp(&b))
        })
    }

    /// Every harvester has at least one selected (anchor, beam) pair with positive yield.
    pub fn covers_all(&self, selection: &[bool]) -> bool {
        self.table.uncovered(selection).is_empty()
    }

    /// Exact route plus optimal charging for a fixed selection.
    pub fn plan_for_selection(&self, selection: &[bool]) -> Result<Plan> {
        if selection.len() != self.anchors.len() {
            return Err(Error::DimensionMismatch { expected: self.anchors.len(), got: selection.len() });
        }
        if !selection[self.start_anchor] {
            return Err(Error::InvalidInput("start anchor must be selected".into()));
        }
        let schedule = self.table.allocate(selection, &self.ehs)?;
        let chosen: Vec<usize> = (0..selection.len()).filter(|&m| selection[m]).collect();
        let route = solve_route(&self.distances, &chosen, self.start_anchor)?;
        let motion_s = route.length / self.alpha;
        let charging_s = schedule.total();
        Ok(Plan {
            anchors: self.anchors.clone(),
            selection: selection.to_vec(),
            route: route.route,
            tour: route.tour,
            schedule,
            start_anchor: self.start_anchor,
            motion_s,
            charging_s,
            planned_completion_s: motion_s + charging_s,
            route_optimal: route.optimal,
        })
    }

    /// The no-selection baseline: tour every candidate anchor.
    pub fn visit_all_baseline(&self) -> Result<Plan> {
        self.plan_for_selection(&vec![true; self.anchors.len()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anchors::Cluster;

    fn anchor(x: f64, y: f64, members: Vec<usize>) -> Anchor {
        Anchor {
            position: Position2D::new(x, y),
            cluster: Cluster {
                members,
                is_outlier_singleton: false,
            },
            feasible_beam: None,
            radius: 0.0,
        }
    }

    fn square_problem() -> PlanningProblem {
        let anchors = vec![
            anchor(0.0, 0.0, vec![0]),
            anchor(1.0, 0.0, vec![1]),
            anchor(1.0, 1.0, vec![2]),
            anchor(0.0, 1.0, vec![3]),
        ];
        let ehs: Vec<EnergyHarvester> =
            anchors.iter().map(|a| EnergyHarvester::new(a.position.x, a.position.y, 0.02)).collect();
        let d = DistanceMatrix::euclidean(&anchors.iter().map(|a| a.position).collect::<Vec<_>>());
        PlanningProblem::new(
            anchors,
            d,
            ehs,
            Codebook::omni(),
            ChannelParams::default(),
            HarvestParams::default(),
            0.2,
            0,
        )
        .unwrap()
    }

    #[test]
    fn visit_all_on_square_has_perimeter_route() {
        let p = square_problem();
        let plan = p.visit_all_baseline().unwrap();
        assert!((plan.route_length(&p.distances) - 4.0).abs() < 1e-12);
        assert!((plan.motion_s - 20.0).abs() < 1e-9);
        plan.validate_structure().unwrap();
        let cost = evaluate_plan(&plan, &p.distances, 0.2).unwrap();
        assert!((cost - plan.planned_completion_s).abs() < 1e-9);
    }

    #[test]
    fn evaluate_adds_motion_and_dwell() {
        let p = square_problem();
        let mut plan = p.visit_all_baseline().unwrap();
        for row in plan.schedule.t.iter_mut() {
            row.iter_mut().for_each(|t| *t = 0.0);
        }
        plan.schedule.t[0][0] = 10.0;
        let cost = evaluate_plan(&plan, &p.distances, 0.2).unwrap();
        assert!((cost - 30.0).abs() < 1e-9);
    }

    #[test]
    fn empty_plan_costs_nothing() {
        let p = square_problem();
        let plan = Plan::empty(p.anchors.clone(), 1);
        assert_eq!(evaluate_plan(&plan, &p.distances, 0.2).unwrap(), 0.0);
        plan.validate_structure().unwrap();
    }

    #[test]
    fn start_anchor_is_required() {
        let p = square_problem();
        assert!(p.plan_for_selection(&[false, true, true, true]).is_err());
    }

    #[test]
    fn nearest_anchor_breaks_ties_low() {
        let anchors = vec![anchor(1.0, 0.0, vec![0]), anchor(-1.0, 0.0, vec![1])];
        assert_eq!(PlanningProblem::nearest_anchor(&anchors, Position2D::ZERO), Some(0));
    }
}
