//! Shared fixtures for the integration and acceptance tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use lpor_core::network::DeliveredPacket;
use lpor_core::{Network, NodeId, Point2D, Protocol, RadioParams, SimParams, TraceKind, TraceRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn p(x: f64, y: f64) -> Point2D {
    Point2D::new(x, y)
}

pub fn params(protocol: Protocol) -> SimParams {
    SimParams { protocol, ..SimParams::default() }
}

/// Runs a single packet from node 0 to `dest` on a static topology, with
/// `failed` nodes dropping everything they hear.
pub fn run_static(protocol: Protocol, positions: &[Point2D], dest: u32, failed: &[u32]) -> Network {
    let mut net = Network::stationary(params(protocol), positions, true).unwrap();
    for &f in failed {
        net.fail_node(NodeId(f)).unwrap();
    }
    net.send_at(NodeId(0), NodeId(dest), 0.0).unwrap();
    net.run_until(5.0);
    net
}

pub fn events(net: &Network) -> Vec<(TraceKind, u32)> {
    net.trace().records().iter().map(|r| (r.kind, r.node.0)).collect()
}

pub fn count(net: &Network, kind: TraceKind) -> usize {
    net.trace().records().iter().filter(|r| r.kind == kind).count()
}

pub fn records(net: &Network) -> &[TraceRecord] {
    net.trace().records()
}

pub fn delivered(net: &Network) -> &[DeliveredPacket] {
    net.delivered()
}

/// Best forwarder written straight from the algorithm description: the
/// destination if it is a neighbor, else the progressing neighbor with the
/// largest free-space power, scanning ids in ascending order and keeping
/// the first maximum.
pub fn literal_best_forwarder(
    rp: &RadioParams,
    cur: Point2D,
    nbrs: &[(u32, Point2D)],
    dest: u32,
    dest_pos: Point2D,
) -> Option<u32> {
    let dist = |a: Point2D, b: Point2D| ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
    if nbrs.iter().any(|(id, _)| *id == dest) {
        return Some(dest);
    }
    let mut sorted = nbrs.to_vec();
    sorted.sort_by_key(|(id, _)| *id);
    let mut best = None;
    let mut max_power = f64::NEG_INFINITY;
    for (id, pos) in sorted {
        if dist(pos, dest_pos) >= dist(cur, dest_pos) {
            continue;
        }
        let d = dist(cur, pos);
        let power = rp.tx_power_watts * rp.tx_gain * rp.rx_gain * rp.wavelength_m.powi(2)
            / ((4.0 * PI * d).powi(2) * rp.system_loss);
        if power > max_power {
            max_power = power;
            best = Some(id);
        }
    }
    best
}

/// One random selection scene: the current node is node 0.
pub struct Scene {
    pub positions: Vec<Point2D>,
    pub dest: u32,
}

impl Scene {
    pub fn cur(&self) -> Point2D {
        self.positions[0]
    }

    pub fn dest_pos(&self) -> Point2D {
        self.positions[self.dest as usize]
    }

    pub fn neighbors(&self, range: f64) -> Vec<(u32, Point2D)> {
        let c = self.cur();
        self.positions
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, q)| ((q.x - c.x).powi(2) + (q.y - c.y).powi(2)).sqrt() <= range)
            .map(|(i, q)| (i as u32, *q))
            .collect()
    }
}

/// Seeded scenes of 2..=50 nodes in 800x800. Every fourth scene snaps
/// coordinates to a 25 m grid so power ties actually occur.
pub fn random_scenes(seed: u64, count: usize) -> Vec<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let n = rng.random_range(2..=50usize);
            let grid = i % 4 == 0;
            let positions = (0..n)
                .map(|_| {
                    let (x, y): (f64, f64) = (rng.random_range(0.0..800.0), rng.random_range(0.0..800.0));
                    if grid {
                        p((x / 25.0).round() * 25.0, (y / 25.0).round() * 25.0)
                    } else {
                        p(x, y)
                    }
                })
                .collect();
            let dest = rng.random_range(1..n) as u32;
            Scene { positions, dest }
        })
        .collect()
}

/// Sparse random static topologies in which a single L-POR packet runs
/// into at least one routing hole.
pub fn hole_scenarios(seed: u64, count: usize) -> Vec<Network> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.random_range(8..=30usize);
        let positions: Vec<Point2D> =
            (0..n).map(|_| p(rng.random_range(0.0..800.0), rng.random_range(0.0..800.0))).collect();
        let src = rng.random_range(0..n) as u32;
        let mut dst = rng.random_range(0..n) as u32;
        if dst == src {
            dst = (dst + 1) % n as u32;
        }
        let mut net = Network::stationary(params(Protocol::Lpor), &positions, true).unwrap();
        net.send_at(NodeId(src), NodeId(dst), 0.0).unwrap();
        net.run_until(5.0);
        if !net.void_records().is_empty() {
            out.push(net);
        }
    }
    out
}

/// Loop-avoidance violations in a finished single-packet run: a node
/// reselected after it was reported void, or transmitting after it went
/// void or disrupted.
pub fn loop_violations(net: &Network) -> Vec<String> {
    let mut bad = Vec::new();
    for r in net.reroutes() {
        if let Some(c) = r.chosen {
            if r.excluded.contains(&c) {
                bad.push(format!("{} reselected excluded {c} at t={}", r.trigger, r.time));
            }
        }
        for v in net.void_records() {
            if v.trigger == r.trigger && v.key == r.key && v.time <= r.time && !r.excluded.contains(&v.void_node) {
                bad.push(format!("{} did not exclude known void {} at t={}", r.trigger, v.void_node, r.time));
            }
        }
    }
    let recs = records(net);
    for (i, r) in recs.iter().enumerate() {
        if matches!(r.kind, TraceKind::Void | TraceKind::Disrupt) {
            let later = recs[i + 1..].iter().find(|q| q.kind == TraceKind::Fwd && q.node == r.node && q.key() == r.key());
            if let Some(q) = later {
                bad.push(format!("{} forwarded at t={} after {:?} at t={}", q.node, q.time, r.kind, r.time));
            }
        }
    }
    let (_, _, pending) = net.event_counts();
    if pending != 0 {
        bad.push(format!("{pending} events still pending"));
    }
    let m = net.metrics();
    if m.received() + m.routing_failures() > 1 {
        bad.push("packet both delivered and failed".into());
    }
    bad
}
