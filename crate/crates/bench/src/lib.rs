//! Fixtures shared by the benchmarks.

use lpor_core::{Neighbor, NodeId, Point2D, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A selection problem: the current node, its neighbors and a destination.
pub struct Scene {
    pub cur: Point2D,
    pub neighbors: Vec<Neighbor>,
    pub dest: NodeId,
    pub dest_pos: Point2D,
}

/// `count` scenes, each with `n` neighbors scattered within `range` of the
/// current node and a destination further away.
pub fn scenes(seed: u64, count: usize, n: usize, range: f64) -> Vec<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let cur = Point2D::new(400.0, 400.0);
            let neighbors = (0..n)
                .map(|i| {
                    let r = range * rng.random::<f64>().sqrt();
                    let a = rng.random_range(0.0..std::f64::consts::TAU);
                    Neighbor::new(NodeId(i as u32 + 1), Point2D::new(cur.x + r * a.cos(), cur.y + r * a.sin()))
                })
                .collect();
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            let dest_pos = Point2D::new(cur.x + 2.0 * range * a.cos(), cur.y + 2.0 * range * a.sin());
            Scene { cur, neighbors, dest: NodeId(n as u32 + 1), dest_pos }
        })
        .collect()
}

/// The reference scenario shortened to `sim_time` seconds, one seed.
pub fn short_scenario(sim_time: f64, speed: f64) -> ScenarioConfig {
    ScenarioConfig { sim_time, speeds: vec![speed], seeds: vec![1], ..ScenarioConfig::default() }
}
