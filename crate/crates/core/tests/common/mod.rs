#![allow(dead_code)]

use prp_core::metrics::Connectivity;
use prp_core::mobility::{place_initial, Position};
use prp_core::sim_core::{rng_stream, StreamLabel};
use prp_core::{KPolicy, MobilityModel, Protocol, RunOutput, ScenarioConfig, Simulation};

pub fn static_config(node_count: usize, protocol: Protocol, k: KPolicy, secs: f64) -> ScenarioConfig {
    ScenarioConfig {
        node_count,
        protocol,
        k_policy: k,
        sim_duration_s: secs,
        mobility: MobilityModel::Static,
        ..Default::default()
    }
}

/// `count` random placements whose unit-disk graph is connected, drawn by
/// rejection from one seeded stream.
pub fn connected_placements(cfg: &ScenarioConfig, count: usize, seed: u64) -> Vec<Vec<Position>> {
    let mut rng = rng_stream(seed, StreamLabel::Mobility);
    let mut out = Vec::new();
    while out.len() < count {
        let p = place_initial(cfg, &mut rng);
        if Connectivity::from_positions(&p, &cfg.radio).is_connected() {
            out.push(p);
        }
    }
    out
}

pub fn run_on(cfg: &ScenarioConfig, positions: &[Position]) -> RunOutput {
    Simulation::with_positions(cfg.clone(), positions.to_vec())
        .expect("valid scenario")
        .run()
}
