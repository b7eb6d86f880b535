use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use robowet_bench::standard_scenario;
use robowet_core::pipeline::{plan_scenario, scenario_anchors, straight_line_distances};
use robowet_core::planner::solve_route;

fn anchors(c: &mut Criterion) {
    let sc = standard_scenario(8);
    c.bench_function("generate_anchors/20_ehs", |b| b.iter(|| scenario_anchors(&sc).unwrap()));
}

fn route(c: &mut Criterion) {
    let sc = standard_scenario(8);
    let a = scenario_anchors(&sc).unwrap();
    let d = straight_line_distances(&a);
    let all: Vec<usize> = (0..a.len()).collect();
    c.bench_function(&format!("solve_route/{}_anchors", a.len()), |b| b.iter(|| solve_route(&d, &all, 0).unwrap()));
}

fn joint(c: &mut Criterion) {
    let sc = standard_scenario(8);
    let (problem, _) = plan_scenario(&sc, 0).unwrap();
    c.bench_function("allocate_charging/visit_all", |b| {
        b.iter(|| problem.table().allocate(&vec![true; problem.anchors.len()], &problem.ehs).unwrap())
    });
    let mut g = c.benchmark_group("joint_optimize");
    g.sample_size(20);
    g.bench_function("20_ehs", |b| {
        b.iter_batched(|| sc.planner.budget(0), |budget| problem.joint_optimize(&budget).unwrap(), BatchSize::SmallInput)
    });
    g.finish();
}

criterion_group!(benches, anchors, route, joint);
criterion_main!(benches);
