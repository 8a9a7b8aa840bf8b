//! Experiment sweeps: one simulation per (protocol, speed, seed).
//!
//! Topology, mobility and traffic depend only on the seed, so both
//! protocols see the same scenario for a given seed and speed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::metrics::MetricsRow;
use crate::mobility::init_positions;
use crate::network::{Network, SimError};
use crate::protocol::{NodeId, Protocol};

/// The finished simulation of one run plus its metrics row.
pub struct RunOutput {
    pub row: MetricsRow,
    pub network: Network,
}

impl RunOutput {
    pub fn trace_text(&self) -> String {
        self.network.trace().render()
    }
}

/// Random distinct `(source, dest)` pairs for `flows` flows.
pub fn flow_pairs(seed: u64, nodes: usize, flows: usize) -> Vec<(NodeId, NodeId)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0074_7261_6666_6963);
    let mut pairs = Vec::with_capacity(flows);
    while pairs.len() < flows {
        let s = rng.random_range(0..nodes);
        let d = rng.random_range(0..nodes);
        let pair = (NodeId(s as u32), NodeId(d as u32));
        if s != d && !pairs.contains(&pair) {
            pairs.push(pair);
        }
    }
    pairs
}

/// Builds the network for one run without executing it.
pub fn build_network(
    cfg: &ScenarioConfig,
    protocol: Protocol,
    speed: f64,
    seed: u64,
    trace: bool,
) -> Result<Network, SimError> {
    let params = cfg.sim_params(protocol);
    let mobility = init_positions(seed, cfg.nodes, cfg.area(), speed, cfg.pause_time)?;
    let mut net = Network::new(params, mobility, seed, trace)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0073_7461_7274);
    let interval = 1.0 / cfg.rate;
    // Traffic starts after one beacon period so beacon-mode tables are warm.
    let warmup = cfg.beacon_interval;
    for (src, dst) in flow_pairs(seed, cfg.nodes, cfg.flows) {
        let start = warmup + rng.random_range(0.0..interval);
        net.add_flow(src, dst, start, cfg.rate, cfg.sim_time)?;
    }
    Ok(net)
}

pub fn run_single(
    cfg: &ScenarioConfig,
    protocol: Protocol,
    speed: f64,
    seed: u64,
    trace: bool,
) -> Result<RunOutput, SimError> {
    let mut network = build_network(cfg, protocol, speed, seed, trace)?;
    network.run_until(cfg.sim_time);
    let row = MetricsRow::from_metrics(network.metrics(), protocol, seed, speed, cfg.nodes);
    Ok(RunOutput { row, network })
}

/// All (protocol, speed, seed) triples in configuration order.
pub fn run_plan(cfg: &ScenarioConfig) -> Vec<(Protocol, f64, u64)> {
    let mut plan = Vec::new();
    for &p in &cfg.protocols {
        for &s in &cfg.speeds {
            for &seed in &cfg.seeds {
                plan.push((p, s, seed));
            }
        }
    }
    plan
}

/// Runs every triple (in parallel) and returns rows in plan order.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<Vec<MetricsRow>, SimError> {
    run_plan(cfg)
        .into_par_iter()
        .map(|(p, s, seed)| run_single(cfg, p, s, seed, false).map(|o| o.row))
        .collect()
}

/// Like [`run_experiment`] but also returns each run's rendered trace.
pub fn run_experiment_traced(cfg: &ScenarioConfig) -> Result<Vec<(MetricsRow, String)>, SimError> {
    run_plan(cfg)
        .into_par_iter()
        .map(|(p, s, seed)| {
            let out = run_single(cfg, p, s, seed, true)?;
            let trace = out.trace_text();
            Ok((out.row, trace))
        })
        .collect()
}
