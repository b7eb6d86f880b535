use proptest::prelude::*;
use robowet_core::anchors::{generate_anchors, max_distance, ClusteringParams};
use robowet_core::models::{beam_covers, Codebook, EnergyHarvester, Position2D};

fn harvesters() -> impl Strategy<Value = Vec<EnergyHarvester>> {
    prop::collection::vec((0.0..8.0f64, 0.0..8.0f64), 1..25)
        .prop_map(|pts| pts.into_iter().map(|(x, y)| EnergyHarvester::new(x, y, 0.02)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn clusters_partition_the_harvesters(ehs in harvesters(), eps in 0.3..2.5f64) {
        let cb = Codebook::three_sector();
        let anchors = generate_anchors(&ehs, &ClusteringParams { eps, min_pts: 2 }, &cb, cb.beam_width_deg()).unwrap();
        let mut seen = vec![0usize; ehs.len()];
        for a in &anchors {
            for &k in &a.cluster.members {
                seen[k] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1), "{:?}", seen);
    }

    #[test]
    fn beam_constrained_anchors_cover_their_clusters(ehs in harvesters(), eps in 0.3..2.5f64) {
        let cb = Codebook::three_sector();
        let anchors = generate_anchors(&ehs, &ClusteringParams { eps, min_pts: 2 }, &cb, cb.beam_width_deg()).unwrap();
        for a in &anchors {
            let beam = a.feasible_beam.expect("three sectors always admit a placement");
            let members: Vec<Position2D> = a.cluster.members.iter().map(|&k| ehs[k].position).collect();
            for p in &members {
                prop_assert!(beam_covers(&cb.sectors[beam], a.position, *p));
            }
            prop_assert!((max_distance(a.position, &members) - a.radius).abs() < 1e-9);
        }
    }

    #[test]
    fn generation_is_deterministic(ehs in harvesters()) {
        let cb = Codebook::three_sector();
        let p = ClusteringParams::default();
        let a = generate_anchors(&ehs, &p, &cb, cb.beam_width_deg()).unwrap();
        let b = generate_anchors(&ehs, &p, &cb, cb.beam_width_deg()).unwrap();
        prop_assert_eq!(a, b);
    }
}
