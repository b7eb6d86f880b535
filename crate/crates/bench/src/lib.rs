//! Shared fixtures for the benchmarks.

use robowet_core::scenario::{generate_scenario, GenParams, Scenario};

/// A generated 20-harvester, 5-mover scenario. Seed 8 is the shipped `five_movers`.
pub fn standard_scenario(seed: u64) -> Scenario {
    generate_scenario(&GenParams {
        seed,
        ..Default::default()
    })
    .expect("default generator settings are valid")
}
