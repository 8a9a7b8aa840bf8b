mod common;

use common::*;
use lpor_core::{Network, NeighborMode, NodeId, Protocol, SimParams, TraceKind, VoidState};
use proptest::prelude::*;

use TraceKind::*;

const TAKEOVER: [(f64, f64); 5] = [(0.0, 0.0), (100.0, 0.0), (90.0, 60.0), (80.0, -80.0), (300.0, 60.0)];

fn takeover_positions() -> Vec<lpor_core::Point2D> {
    TAKEOVER.iter().map(|&(x, y)| p(x, y)).collect()
}

#[test]
fn healthy_forwarder_suppresses_both_candidates() {
    let net = run_static(Protocol::Lpor, &takeover_positions(), 4, &[]);
    assert_eq!(events(&net), vec![(Send, 0), (Fwd, 1), (Suppress, 2), (Suppress, 3), (Recv, 4)]);
    assert_eq!(net.metrics().forwarded(), 1);
}

#[test]
fn second_candidate_takes_over_when_first_also_fails() {
    let net = run_static(Protocol::Lpor, &takeover_positions(), 4, &[1, 2]);
    // CN2 is out of range of D and can only hand over to failed nodes.
    assert_eq!(events(&net), vec![(Send, 0), (Fwd, 3)]);
    let fwd = records(&net)[1];
    assert!((fwd.time - 0.020).abs() < 1e-9, "CN2 waits two thresholds, fired at {}", fwd.time);
}

#[test]
fn all_receivers_failed_loses_packet_silently() {
    let net = run_static(Protocol::Lpor, &takeover_positions(), 4, &[1, 2, 3]);
    assert_eq!(events(&net), vec![(Send, 0)]);
    assert_eq!(net.metrics().pdr().unwrap(), 0.0);
}

#[test]
fn por_and_lpor_pick_different_forwarders() {
    // Strongest link is the near node 1, greatest progress is node 2.
    let positions = [p(0.0, 0.0), p(100.0, 0.0), p(200.0, 0.0), p(400.0, 0.0)];
    let lpor = run_static(Protocol::Lpor, &positions, 3, &[]);
    let por = run_static(Protocol::Por, &positions, 3, &[]);
    assert_eq!(lpor.delivered()[0].path.iter().map(|s| s.to.0).collect::<Vec<_>>(), [1, 2, 3]);
    assert_eq!(por.delivered()[0].path.iter().map(|s| s.to.0).collect::<Vec<_>>(), [2, 3]);
}

#[test]
fn neighbor_destination_is_one_hop() {
    let net = run_static(Protocol::Lpor, &[p(0.0, 0.0), p(50.0, 0.0), p(200.0, 0.0)], 2, &[]);
    assert_eq!(events(&net), vec![(Send, 0), (Recv, 2)]);
    assert_eq!(net.delivered()[0].hops, 1);
}

#[test]
fn reroute_is_acknowledged_hop_by_hop() {
    let positions = [p(0.0, 0.0), p(100.0, 0.0), p(120.0, 170.0), p(300.0, 200.0), p(400.0, 0.0)];
    let net = run_static(Protocol::Lpor, &positions, 4, &[]);
    let acks: Vec<u32> = records(&net).iter().filter(|r| r.kind == Ack).map(|r| r.node.0).collect();
    assert_eq!(acks, [4, 3, 2]);
    assert_eq!(net.void_records().len(), 1);
    let v = net.void_records()[0];
    assert_eq!((v.trigger, v.void_node, v.state), (NodeId(0), NodeId(1), VoidState::Acked));
    assert!(net.delivered()[0].rerouted);
    assert_eq!(net.node_state(NodeId(1)).unwrap().voided.len(), 1);
}

#[test]
fn disrupt_cascades_to_source() {
    let positions = [p(-150.0, 0.0), p(0.0, 0.0), p(100.0, 0.0), p(400.0, 0.0)];
    let net = run_static(Protocol::Lpor, &positions, 3, &[]);
    assert_eq!(net.metrics().routing_failures(), 1);
    assert!(net.void_records().iter().all(|v| v.state == VoidState::Disrupted));
    let voids = net.voids_by_packet();
    let known: Vec<u32> = voids.values().next().unwrap().iter().map(|n| n.0).collect();
    assert_eq!(known, [1, 2]);
}

#[test]
fn hole_scenarios_are_loop_free() {
    for (i, net) in hole_scenarios(7, 40).iter().enumerate() {
        assert!(loop_violations(net).is_empty(), "scenario {i}: {:?}", loop_violations(net));
    }
}

#[test]
fn lossy_runs_are_reproducible() {
    let params = SimParams { drop_probability: 0.3, ..params(Protocol::Lpor) };
    let run = || {
        let positions: Vec<_> = (0..12).map(|i| p(60.0 * f64::from(i), 30.0 * f64::from(i % 3))).collect();
        let mut net = Network::stationary(params.clone(), &positions, true).unwrap();
        net.add_flow(NodeId(0), NodeId(11), 0.0, 20.0, 2.0).unwrap();
        net.run_until(3.0);
        net.trace().render()
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.contains("SEND"));
}

#[test]
fn beacon_mode_needs_a_beacon_before_routing() {
    let params = SimParams { neighbor_mode: NeighborMode::Beacon, ..params(Protocol::Lpor) };
    let positions = [p(0.0, 0.0), p(100.0, 0.0), p(200.0, 0.0), p(300.0, 0.0)];
    let mut net = Network::stationary(params, &positions, true).unwrap();
    // Before any HELLO the source knows nobody and hits a hole.
    net.send_at(NodeId(0), NodeId(3), 0.0).unwrap();
    net.send_at(NodeId(0), NodeId(3), 1.5).unwrap();
    net.run_until(4.0);
    assert_eq!(net.metrics().routing_failures(), 1);
    assert_eq!(net.metrics().received(), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_static_runs_keep_invariants(seed in any::<u64>(), por in any::<bool>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = rng.random_range(5..40usize);
        let positions: Vec<_> = (0..n).map(|_| p(rng.random_range(0.0..800.0), rng.random_range(0.0..800.0))).collect();
        let protocol = if por { Protocol::Por } else { Protocol::Lpor };
        let mut net = Network::stationary(params(protocol), &positions, true).unwrap();
        for k in 0..5u32 {
            let s = rng.random_range(0..n) as u32;
            let d = (s + 1 + rng.random_range(0..n as u32 - 1)) % n as u32;
            net.send_at(NodeId(s), NodeId(d), f64::from(k) * 0.5).unwrap();
        }
        net.run_until(10.0);
        let m = net.metrics();
        prop_assert!(m.received() + m.routing_failures() <= m.sent());
        prop_assert_eq!(net.delivered().len() as u64, m.received());
        for d in net.delivered().iter().filter(|d| !d.rerouted) {
            prop_assert!(d.path.iter().all(|s| s.to_dist < s.from_dist));
        }
        prop_assert_eq!(net.event_counts().2, 0);
    }
}
