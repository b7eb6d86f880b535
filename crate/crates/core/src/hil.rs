//! Measure, refit, re-plan.
//!
//! Each round plans against the current distance matrix, runs the plan in the
//! simulator, and rewrites the matrix from the measured edge times.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{motion_time_s, DistanceMatrix};
use crate::pipeline::{build_problem, scenario_anchors, straight_line_distances};
use crate::planner::{Plan, PlanningProblem};
use crate::scenario::Scenario;
use crate::sim::{extract_edge_times, run_mission, SimTrace};

/// How measured edge times feed back into the distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "factor")]
pub enum HilMode {
    /// Measured edges take `alpha * T`; the rest scale by the mean measured ratio.
    PerEdge,
    /// Every entry scales by one factor.
    GlobalFactor(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HilConfig {
    pub rounds_max: usize,
    /// Stop once completion changes by less than this fraction.
    pub improve_tol: f64,
    pub mode: HilMode,
}

impl Default for HilConfig {
    fn default() -> Self {
        Self {
            rounds_max: 3,
            improve_tol: 0.02,
            mode: HilMode::PerEdge,
        }
    }
}

impl HilConfig {
    pub fn validate(&self) -> Result<()> {
        let mode_ok = match self.mode {
            HilMode::PerEdge => true,
            HilMode::GlobalFactor(f) => f > 0.0 && f.is_finite(),
        };
        if self.rounds_max >= 1 && self.improve_tol >= 0.0 && mode_ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid hil settings: {self:?}")))
        }
    }
}

/// Refits `d` from measured edge times (seconds) at cruise speed `alpha`.
pub fn update_distance_matrix(
    d: &DistanceMatrix,
    edge_times: &BTreeMap<(usize, usize), f64>,
    alpha: f64,
    mode: HilMode,
) -> Result<DistanceMatrix> {
    let n = d.len();
    match mode {
        HilMode::GlobalFactor(f) => d.scaled(f),
        HilMode::PerEdge => {
            if edge_times.is_empty() {
                return Err(Error::InvalidInput("no measured edges".into()));
            }
            let mut ratios = Vec::new();
            for (&(m, j), &t) in edge_times {
                if m >= n || j >= n || m == j {
                    return Err(Error::InvalidInput(format!("measured edge ({m},{j}) is not an off-diagonal entry")));
                }
                if !(t > 0.0) || !t.is_finite() {
                    return Err(Error::InvalidInput(format!("edge ({m},{j}) measured at {t} s")));
                }
                if d.get(m, j) > 0.0 {
                    ratios.push(alpha * t / d.get(m, j));
                }
            }
            let mean = if ratios.is_empty() { 1.0 } else { ratios.iter().sum::<f64>() / ratios.len() as f64 };
            let rows = (0..n)
                .map(|m| {
                    (0..n)
                        .map(|j| match edge_times.get(&(m, j)) {
                            _ if m == j => 0.0,
                            Some(&t) => alpha * t,
                            None => mean * d.get(m, j),
                        })
                        .collect()
                })
                .collect();
            DistanceMatrix::new(rows)
        }
    }
}

/// Keeps the incumbent plan unless the fresh one is predicted to beat it by
/// more than `tol` (relative) under the problem's current distances. Either
/// way the returned plan's times are costed against those distances.
fn choose_plan(problem: &PlanningProblem, fresh: Plan, incumbent: Option<&Plan>, tol: f64) -> Result<Plan> {
    let Some(old) = incumbent else {
        return Ok(fresh);
    };
    let mut kept = old.clone();
    kept.motion_s = motion_time_s(&problem.distances, &kept.route, problem.alpha)?;
    kept.planned_completion_s = kept.motion_s + kept.charging_s;
    if fresh.planned_completion_s < (1.0 - tol) * kept.planned_completion_s {
        Ok(fresh)
    } else {
        Ok(kept)
    }
}

#[derive(Debug, Clone)]
pub struct HilRound {
    pub round_index: usize,
    /// The matrix this round planned against.
    pub distance_matrix: DistanceMatrix,
    pub plan: Plan,
    /// Selections the round's search evaluated.
    pub evaluations: usize,
    pub trace: SimTrace,
    pub simulated_completion_s: Option<f64>,
}

/// All rounds run, plus the error that stopped the loop early, if any.
#[derive(Debug, Clone)]
pub struct HilHistory {
    pub rounds: Vec<HilRound>,
    pub aborted: Option<Error>,
}

/// Runs up to `rounds_max` plan/simulate/refit rounds with the same seed.
///
/// Round 0 plans on straight-line distances. Later rounds re-plan on the
/// refitted matrix and switch plans only for a predicted gain above
/// `improve_tol`. Stops early when completion changes by less than
/// `improve_tol` of the latest completion, or when a round measured nothing
/// to refit from.
pub fn hil_iterate(scenario: &Scenario, rounds_max: usize, improve_tol: f64, seed: u64) -> Result<HilHistory> {
    hil_iterate_with(scenario, rounds_max, improve_tol, seed, scenario.hil.mode)
}

pub fn hil_iterate_with(
    scenario: &Scenario,
    rounds_max: usize,
    improve_tol: f64,
    seed: u64,
    mode: HilMode,
) -> Result<HilHistory> {
    if rounds_max == 0 {
        return Err(Error::InvalidInput("rounds_max must be at least 1".into()));
    }
    let anchors = scenario_anchors(scenario)?;
    let mut d = straight_line_distances(&anchors);
    let alpha = scenario.robot.linear_speed;
    let mut rounds: Vec<HilRound> = Vec::new();
    for r in 0..rounds_max {
        if let Some(prev) = rounds.last() {
            let times = extract_edge_times(&prev.trace);
            if times.is_empty() && mode == HilMode::PerEdge {
                break;
            }
            d = match update_distance_matrix(&d, &times, alpha, mode) {
                Ok(d) => d,
                Err(e) => return Ok(HilHistory { rounds, aborted: Some(e) }),
            };
        }
        let incumbent = rounds.last().map(|p| &p.plan);
        let step = build_problem(scenario, anchors.clone(), d.clone())
            .and_then(|p| {
                let out = p.joint_optimize(&scenario.planner.budget(seed))?;
                Ok((choose_plan(&p, out.plan, incumbent, improve_tol)?, out.evaluations))
            })
            .and_then(|(plan, evaluations)| {
                let trace = run_mission(&plan, scenario, seed, scenario.sim.dt)?;
                Ok((plan, evaluations, trace))
            });
        let (plan, evaluations, trace) = match step {
            Ok(x) => x,
            Err(e) => return Ok(HilHistory { rounds, aborted: Some(e) }),
        };
        let completion = trace.completion_s;
        let prev = rounds.last().and_then(|p| p.simulated_completion_s);
        rounds.push(HilRound {
            round_index: r,
            distance_matrix: d.clone(),
            plan,
            evaluations,
            trace,
            simulated_completion_s: completion,
        });
        if let (Some(a), Some(b)) = (prev, completion) {
            if (a - b).abs() < improve_tol * b {
                break;
            }
        }
    }
    Ok(HilHistory { rounds, aborted: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn times(entries: &[((usize, usize), f64)]) -> BTreeMap<(usize, usize), f64> {
        entries.iter().copied().collect()
    }

    #[test]
    fn measured_edge_takes_alpha_t() {
        let d = DistanceMatrix::new(vec![vec![0.0, 2.0, 1.0], vec![2.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let u = update_distance_matrix(&d, &times(&[((1, 2), 15.0)]), 0.2, HilMode::PerEdge).unwrap();
        assert!((u.get(1, 2) - 3.0).abs() < 1e-12);
        // ratio 3, applied to everything unmeasured
        assert!((u.get(0, 1) - 6.0).abs() < 1e-12);
        assert_eq!(u.get(2, 2), 0.0);
    }

    #[test]
    fn mean_ratio_fills_unmeasured_edges() {
        let n = 5;
        let mut rows = vec![vec![1.0; n]; n];
        for (i, r) in rows.iter_mut().enumerate() {
            r[i] = 0.0;
        }
        rows[3][4] = 5.0;
        let d = DistanceMatrix::new(rows).unwrap();
        // ratios 1.2 and 1.6, mean 1.4
        let t = times(&[((0, 1), 6.0), ((1, 2), 8.0)]);
        let u = update_distance_matrix(&d, &t, 0.2, HilMode::PerEdge).unwrap();
        assert!((u.get(3, 4) - 7.0).abs() < 1e-12);
    }

    #[test]
    fn global_factor_scales() {
        let d = DistanceMatrix::new(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        let u = update_distance_matrix(&d, &BTreeMap::new(), 0.2, HilMode::GlobalFactor(1.5)).unwrap();
        assert_eq!(u.rows(), &[vec![0.0, 3.0], vec![3.0, 0.0]]);
    }

    #[test]
    fn per_edge_update_is_idempotent() {
        let d = DistanceMatrix::new(vec![vec![0.0, 2.0, 3.0], vec![2.0, 0.0, 4.0], vec![3.0, 4.0, 0.0]]).unwrap();
        let t = times(&[((0, 1), 13.0), ((1, 2), 21.0)]);
        let once = update_distance_matrix(&d, &t, 0.2, HilMode::PerEdge).unwrap();
        let twice = update_distance_matrix(&once, &t, 0.2, HilMode::PerEdge).unwrap();
        for m in 0..3 {
            for j in 0..3 {
                assert!((once.get(m, j) - twice.get(m, j)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_measurements_rejected() {
        let d = DistanceMatrix::new(vec![vec![0.0, 2.0], vec![2.0, 0.0]]).unwrap();
        assert!(update_distance_matrix(&d, &times(&[((0, 1), 0.0)]), 0.2, HilMode::PerEdge).is_err());
        assert!(update_distance_matrix(&d, &BTreeMap::new(), 0.2, HilMode::PerEdge).is_err());
    }
}
