use proptest::prelude::*;
use robowet_core::models::{harvested_power_w, motion_time_s, received_power_w};
use robowet_core::pipeline::plan_scenario;
use robowet_core::planner::{check_route_constraints_rooted, evaluate_plan, MtzSlack, Plan, PlanningProblem};
use robowet_core::scenario::{generate_scenario, GenParams};

fn generated(seed: u64, ehs: usize) -> robowet_core::scenario::Scenario {
    generate_scenario(&GenParams { seed, ehs, blobs: 3, scattered: 2, ..Default::default() }).unwrap()
}

/// Energy each harvester gets from `plan`, recomputed from the channel and
/// harvest models rather than the planner's table.
fn delivered(problem: &PlanningProblem, plan: &Plan) -> Vec<f64> {
    problem
        .ehs
        .iter()
        .map(|eh| {
            let mut e = 0.0;
            for (n, sector) in problem.codebook.sectors.iter().enumerate() {
                for (m, a) in plan.anchors.iter().enumerate() {
                    let p = received_power_w(&problem.channel, sector, a.position, eh.position);
                    e += plan.schedule.t[n][m] * harvested_power_w(p, &problem.harvest);
                }
            }
            e
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plans_are_rings_that_meet_every_requirement(seed in 0u64..10_000, ehs in 3usize..16) {
        let sc = generated(seed, ehs);
        let (problem, out) = plan_scenario(&sc, seed).unwrap();
        for plan in [out.plan, problem.visit_all_baseline().unwrap()] {
            let slack = MtzSlack::for_route(&plan.selection, &plan.route, plan.start_anchor).unwrap();
            prop_assert!(check_route_constraints_rooted(&plan.selection, &plan.route, &slack.lambda, plan.start_anchor));
            prop_assert!(plan.selection[plan.start_anchor]);
            for (got, eh) in delivered(&problem, &plan).iter().zip(&problem.ehs) {
                prop_assert!(*got >= eh.requirement_j * (1.0 - 1e-9), "{} < {}", got, eh.requirement_j);
            }
            let cost = evaluate_plan(&plan, &problem.distances, problem.alpha).unwrap();
            prop_assert!((cost - plan.planned_completion_s).abs() <= 1e-9 * cost.max(1.0));
        }
    }

    #[test]
    fn accepted_costs_strictly_decrease(seed in 0u64..10_000) {
        let (_, out) = plan_scenario(&generated(seed, 14), seed).unwrap();
        prop_assert!(out.accepted.windows(2).all(|w| w[1] < w[0]), "{:?}", out.accepted);
        prop_assert_eq!(out.accepted.last().copied(), Some(out.plan.planned_completion_s));
    }

    #[test]
    fn doubling_distances_doubles_motion_only(seed in 0u64..10_000) {
        let (problem, out) = plan_scenario(&generated(seed, 12), seed).unwrap();
        let plan = &out.plan;
        let d2 = problem.distances.scaled(2.0).unwrap();
        let m1 = motion_time_s(&problem.distances, &plan.route, problem.alpha).unwrap();
        let m2 = motion_time_s(&d2, &plan.route, problem.alpha).unwrap();
        prop_assert_eq!(m2, 2.0 * m1);
        let twice = problem.with_distances(d2).unwrap();
        let s1 = problem.table().allocate(&plan.selection, &problem.ehs).unwrap();
        let s2 = twice.table().allocate(&plan.selection, &twice.ehs).unwrap();
        prop_assert_eq!(s1, s2);
    }
}
