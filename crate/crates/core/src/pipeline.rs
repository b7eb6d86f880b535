//! Scenario to plan: anchors, distance matrix, joint optimization.

use crate::anchors::{generate_anchors, Anchor};
use crate::error::{Error, Result};
use crate::models::{DistanceMatrix, Position2D};
use crate::planner::{PlanningProblem, SearchOutcome};
use crate::scenario::Scenario;

/// Candidate anchors for the scenario's harvesters.
pub fn scenario_anchors(scenario: &Scenario) -> Result<Vec<Anchor>> {
    generate_anchors(
        &scenario.ehs,
        &scenario.clustering,
        &scenario.codebook,
        scenario.codebook.beam_width_deg(),
    )
}

/// Planning problem over `anchors` with distance matrix `d`.
///
/// The ring starts at the anchor nearest the robot's start pose.
pub fn build_problem(scenario: &Scenario, anchors: Vec<Anchor>, d: DistanceMatrix) -> Result<PlanningProblem> {
    let start = PlanningProblem::nearest_anchor(&anchors, scenario.robot.start)
        .ok_or_else(|| Error::InvalidInput("no candidate anchors".into()))?;
    PlanningProblem::new(
        anchors,
        d,
        scenario.ehs.clone(),
        scenario.codebook.clone(),
        scenario.channel,
        scenario.harvest,
        scenario.robot.linear_speed,
        start,
    )
}

/// Straight-line distances between anchors.
pub fn straight_line_distances(anchors: &[Anchor]) -> DistanceMatrix {
    let pts: Vec<Position2D> = anchors.iter().map(|a| a.position).collect();
    DistanceMatrix::euclidean(&pts)
}

/// Anchors, straight-line problem, and the jointly optimized plan.
pub fn plan_scenario(scenario: &Scenario, seed: u64) -> Result<(PlanningProblem, SearchOutcome)> {
    let anchors = scenario_anchors(scenario)?;
    let d = straight_line_distances(&anchors);
    let problem = build_problem(scenario, anchors, d)?;
    let outcome = problem.joint_optimize(&scenario.planner.budget(seed))?;
    Ok((problem, outcome))
}
