//! The simulated network: node state, an idealised broadcast medium and the
//! event loop that drives the routing handlers.
//!
//! Frames are delivered to every node inside the unit disk of the sender at
//! send time, after `tx_delay + distance / c`. There are no collisions; an
//! optional per-link drop probability models loss.

mod forwarding;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::engine::{EngineError, Event, EventQueue};
use crate::geom::{euclid_distance, in_range, Point2D, PowerModel, RadioError, RadioParams, SPEED_OF_LIGHT};
use crate::hole::{RerouteRecord, VoidRecord};
use crate::metrics::MetricsAccumulator;
use crate::mobility::{Area, MobilityError, MobilityState};
use crate::protocol::{
    por_select_forwarder, select_best_forwarder_with, select_candidates_with, Neighbor, NodeId,
    NodeProtocolState, PacketHeader, PacketKey, Protocol,
};
use crate::trace::{TraceKind, TraceLog, TraceRecord};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("source and destination must differ (node {0})")]
    SelfFlow(NodeId),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Mobility(#[from] MobilityError),
    #[error(transparent)]
    Radio(#[from] RadioError),
}

/// How a node learns its neighbors' positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NeighborMode {
    /// Exact positions of every node in range at decision time.
    #[default]
    Oracle,
    /// Positions from periodic HELLO beacons, possibly stale.
    Beacon,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timers {
    /// Candidate wait per rank: CN1 fires at `st + t`, CN2 at `st + 2t`.
    pub candidate_threshold: f64,
    /// Lifetime of forwarding-table entries and cached packets.
    pub table_lifetime: f64,
    pub beacon_interval: f64,
    /// Beacon-learned neighbors older than this are forgotten.
    pub neighbor_timeout: f64,
}

impl Default for Timers {
    fn default() -> Self {
        Self {
            candidate_threshold: 0.010,
            table_lifetime: 2.0,
            beacon_interval: 1.0,
            neighbor_timeout: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub protocol: Protocol,
    pub radio: RadioParams,
    pub power_model: PowerModel,
    pub area: Area,
    pub timers: Timers,
    pub neighbor_mode: NeighborMode,
    pub drop_probability: f64,
    pub packet_bytes: u32,
    pub bandwidth_bps: f64,
    pub propagation_speed: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            protocol: Protocol::Lpor,
            radio: RadioParams::default(),
            power_model: PowerModel::Friis,
            area: Area::default(),
            timers: Timers::default(),
            neighbor_mode: NeighborMode::Oracle,
            drop_probability: 0.0,
            packet_bytes: 512,
            bandwidth_bps: 2e6,
            propagation_speed: SPEED_OF_LIGHT,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<(), SimError> {
        self.radio.validate()?;
        let positive = [
            ("candidate_threshold", self.timers.candidate_threshold),
            ("table_lifetime", self.timers.table_lifetime),
            ("beacon_interval", self.timers.beacon_interval),
            ("neighbor_timeout", self.timers.neighbor_timeout),
            ("bandwidth_bps", self.bandwidth_bps),
            ("propagation_speed", self.propagation_speed),
            ("packet_bytes", f64::from(self.packet_bytes)),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::InvalidParam { name, reason: format!("{v} is not positive") });
            }
        }
        if !(0.0..1.0).contains(&self.drop_probability) {
            return Err(SimError::InvalidParam {
                name: "drop_probability",
                reason: format!("{} is outside [0, 1)", self.drop_probability),
            });
        }
        Ok(())
    }

    /// Serialisation time of one frame.
    pub fn tx_delay(&self) -> f64 {
        f64::from(self.packet_bytes) * 8.0 / self.bandwidth_bps
    }
}

/// One hop of a delivered packet's path, with both distances to the
/// destination measured at the moment `from` transmitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgressStep {
    pub from: NodeId,
    pub to: NodeId,
    pub from_dist: f64,
    pub to_dist: f64,
}

/// A data packet as carried over the air or held by a node.
///
/// Besides the routing header it carries simulator instrumentation: hop
/// counter, origination time, the path walked so far and the hole-recovery
/// context (known void nodes and the active trigger).
#[derive(Debug, Clone, PartialEq)]
pub struct DataPacket {
    pub header: PacketHeader,
    /// Last node to transmit this copy.
    pub transmitter: NodeId,
    /// Transmitter's distance to the destination when it sent.
    pub tx_dist: f64,
    /// Node that handed this copy to its current holder; `None` at the source.
    pub prev_hop: Option<NodeId>,
    /// Destination position from the location service, fixed at origination.
    pub dest_pos: Point2D,
    pub hops: u32,
    pub origin_time: f64,
    pub trigger: Option<NodeId>,
    pub voids: BTreeSet<NodeId>,
    pub rerouted: bool,
    pub path: Vec<ProgressStep>,
}

impl DataPacket {
    pub fn key(&self) -> PacketKey {
        self.header.key()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Frame {
    Data(DataPacket),
    Void { key: PacketKey, dest: NodeId, void_node: NodeId, to: NodeId, voids: Vec<NodeId> },
    Disrupt { key: PacketKey, dest: NodeId, from: NodeId, to: NodeId, voids: Vec<NodeId> },
    /// Acknowledgement travelling back to `trigger`; `route[0]` is the next
    /// node expected to act on it.
    Ack { key: PacketKey, dest: NodeId, trigger: NodeId, route: Vec<NodeId> },
    Hello { from: NodeId, pos: Point2D },
}

#[derive(Debug, Clone)]
pub enum EventKind {
    PacketDelivery { to: NodeId, frame: Arc<Frame>, rx_dist: f64 },
    TimerExpiry { node: NodeId, key: PacketKey },
    TrafficSourceFire { flow: usize },
    BeaconFire { node: NodeId },
    TableExpiry { node: NodeId, key: PacketKey },
}

/// Constant-rate traffic between two nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub source: NodeId,
    pub dest: NodeId,
    pub interval: f64,
    /// No packets are originated at or after this time.
    pub stop: f64,
}

/// A packet that reached its destination, with the path it took.
#[derive(Debug, Clone, PartialEq)]
pub struct DeliveredPacket {
    pub key: PacketKey,
    pub hops: u32,
    pub rerouted: bool,
    pub path: Vec<ProgressStep>,
}

pub struct Network {
    params: SimParams,
    queue: EventQueue<EventKind>,
    mobility: Vec<MobilityState>,
    failed: Vec<bool>,
    nodes: Vec<NodeProtocolState<DataPacket>>,
    flows: Vec<Flow>,
    medium_rng: ChaCha8Rng,
    metrics: MetricsAccumulator,
    trace: TraceLog,
    pub(crate) void_records: Vec<VoidRecord>,
    pub(crate) reroutes: Vec<RerouteRecord>,
    delivered: Vec<DeliveredPacket>,
    pos_cache: Option<(f64, Vec<Point2D>)>,
}

impl Network {
    /// Builds a network from initial mobility states. `seed` drives the
    /// medium (loss draws, beacon phases).
    pub fn new(params: SimParams, mobility: Vec<MobilityState>, seed: u64, trace: bool) -> Result<Self, SimError> {
        params.validate()?;
        if mobility.is_empty() {
            return Err(MobilityError::NoNodes.into());
        }
        let n = mobility.len();
        let mut net = Self {
            queue: EventQueue::new(),
            failed: vec![false; n],
            nodes: (0..n).map(|_| NodeProtocolState::default()).collect(),
            flows: Vec::new(),
            medium_rng: ChaCha8Rng::seed_from_u64(seed ^ 0x6d65_6469_756d),
            metrics: MetricsAccumulator::new(),
            trace: TraceLog::new(trace),
            void_records: Vec::new(),
            reroutes: Vec::new(),
            delivered: Vec::new(),
            pos_cache: None,
            mobility,
            params,
        };
        if net.params.neighbor_mode == NeighborMode::Beacon {
            let interval = net.params.timers.beacon_interval;
            for i in 0..n {
                let phase = net.medium_rng.random_range(0.0..interval);
                net.queue.schedule(phase, EventKind::BeaconFire { node: NodeId(i as u32) })?;
            }
        }
        Ok(net)
    }

    /// A network of nodes that never move.
    pub fn stationary(params: SimParams, positions: &[Point2D], trace: bool) -> Result<Self, SimError> {
        let area = params.area;
        let mobility = positions.iter().map(|p| MobilityState::stationary(*p, area)).collect();
        Self::new(params, mobility, 0, trace)
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    pub fn trace(&self) -> &TraceLog {
        &self.trace
    }

    pub fn void_records(&self) -> &[VoidRecord] {
        &self.void_records
    }

    pub fn reroutes(&self) -> &[RerouteRecord] {
        &self.reroutes
    }

    pub fn delivered(&self) -> &[DeliveredPacket] {
        &self.delivered
    }

    pub fn node_state(&self, id: NodeId) -> Option<&NodeProtocolState<DataPacket>> {
        self.nodes.get(id.index())
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    /// Events scheduled, executed, and still pending.
    pub fn event_counts(&self) -> (u64, u64, usize) {
        (self.queue.scheduled(), self.queue.executed(), self.queue.len())
    }

    fn check_node(&self, id: NodeId) -> Result<(), SimError> {
        if id.index() < self.nodes.len() {
            Ok(())
        } else {
            Err(SimError::UnknownNode(id))
        }
    }

    /// Makes `id` silently discard everything it receives from now on.
    pub fn fail_node(&mut self, id: NodeId) -> Result<(), SimError> {
        self.check_node(id)?;
        self.failed[id.index()] = true;
        Ok(())
    }

    /// Adds a constant-rate flow whose first packet leaves at `start`.
    pub fn add_flow(&mut self, source: NodeId, dest: NodeId, start: f64, rate: f64, stop: f64) -> Result<(), SimError> {
        self.check_node(source)?;
        self.check_node(dest)?;
        if source == dest {
            return Err(SimError::SelfFlow(source));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(SimError::InvalidParam { name: "rate", reason: format!("{rate} is not positive") });
        }
        let flow = self.flows.len();
        self.flows.push(Flow { source, dest, interval: 1.0 / rate, stop });
        if start < stop {
            self.queue.schedule(start, EventKind::TrafficSourceFire { flow })?;
        }
        Ok(())
    }

    /// Schedules a single packet from `source` to `dest` at time `at`.
    pub fn send_at(&mut self, source: NodeId, dest: NodeId, at: f64) -> Result<(), SimError> {
        self.check_node(source)?;
        self.check_node(dest)?;
        if source == dest {
            return Err(SimError::SelfFlow(source));
        }
        let flow = self.flows.len();
        self.flows.push(Flow { source, dest, interval: f64::INFINITY, stop: f64::INFINITY });
        self.queue.schedule(at, EventKind::TrafficSourceFire { flow })?;
        Ok(())
    }

    /// Executes every event due at or before `t_end`.
    pub fn run_until(&mut self, t_end: f64) {
        while let Some(ev) = self.queue.pop_until(t_end) {
            self.dispatch(ev);
        }
        self.queue.advance_to(t_end);
    }

    fn dispatch(&mut self, ev: Event<EventKind>) {
        match ev.payload {
            EventKind::PacketDelivery { to, frame, rx_dist } => {
                if self.failed[to.index()] {
                    return;
                }
                self.on_frame(to, &frame, rx_dist);
            }
            EventKind::TimerExpiry { node, key } => {
                if !self.failed[node.index()] {
                    self.on_candidate_timeout(node, key, ev.seq_no);
                }
            }
            EventKind::TrafficSourceFire { flow } => {
                let f = self.flows[flow];
                if !self.failed[f.source.index()] {
                    self.originate(f.source, f.dest)
                        .expect("flow endpoints are validated when the flow is added");
                }
                let next = ev.time + f.interval;
                if next < f.stop {
                    self.schedule(next, EventKind::TrafficSourceFire { flow });
                }
            }
            EventKind::BeaconFire { node } => {
                if !self.failed[node.index()] {
                    let pos = self.position(node);
                    self.broadcast(node, Frame::Hello { from: node, pos });
                }
                let next = ev.time + self.params.timers.beacon_interval;
                self.schedule(next, EventKind::BeaconFire { node });
            }
            EventKind::TableExpiry { node, key } => {
                let now = self.now();
                let state = &mut self.nodes[node.index()];
                if state.cache.get(&key).is_some_and(|c| c.expiry <= now) {
                    state.cache.remove(&key);
                }
                state.table.purge_expired(now);
            }
        }
    }

    fn on_frame(&mut self, node: NodeId, frame: &Frame, rx_dist: f64) {
        match frame {
            Frame::Data(pkt) => self.on_data(node, pkt, rx_dist),
            Frame::Void { key, void_node, to, voids, .. } => {
                if *to == node {
                    self.on_void_warning(node, *key, *void_node, voids);
                }
            }
            Frame::Disrupt { key, from, to, voids, .. } => {
                if *to == node {
                    self.on_disrupt(node, *key, *from, voids);
                }
            }
            Frame::Ack { key, dest, trigger, route } => {
                if route.first() == Some(&node) {
                    self.on_ack(node, *key, *dest, *trigger, &route[1..]);
                }
            }
            Frame::Hello { from, pos } => {
                let now = self.now();
                self.nodes[node.index()].neighbors.insert(*from, (*pos, now));
            }
        }
    }

    pub(crate) fn schedule(&mut self, at: f64, kind: EventKind) -> u64 {
        self.queue
            .schedule(at, kind)
            .expect("handlers only schedule at or after the current time")
    }

    /// Positions of all nodes at the current time.
    pub(crate) fn positions(&mut self) -> &[Point2D] {
        let now = self.queue.now();
        let fresh = matches!(&self.pos_cache, Some((t, _)) if *t == now);
        if !fresh {
            let ps = self.mobility.iter_mut().map(|m| m.position_at(now)).collect();
            self.pos_cache = Some((now, ps));
        }
        &self.pos_cache.as_ref().expect("filled above").1
    }

    pub fn position(&mut self, id: NodeId) -> Point2D {
        self.positions()[id.index()]
    }

    /// Neighbors of `node` as known to it right now.
    pub(crate) fn neighbor_view(&mut self, node: NodeId) -> Vec<Neighbor> {
        match self.params.neighbor_mode {
            NeighborMode::Oracle => {
                let range = self.params.radio.range_m;
                let ps = self.positions();
                let me = ps[node.index()];
                ps.iter()
                    .enumerate()
                    .filter(|(i, p)| *i != node.index() && in_range(me, **p, range))
                    .map(|(i, p)| Neighbor::new(NodeId(i as u32), *p))
                    .collect()
            }
            NeighborMode::Beacon => {
                let now = self.now();
                let timeout = self.params.timers.neighbor_timeout;
                self.nodes[node.index()]
                    .fresh_neighbors(now, timeout)
                    .filter(|(id, _)| *id != node)
                    .map(|(id, pos)| Neighbor::new(id, pos))
                    .collect()
            }
        }
    }

    /// Runs the configured forwarder rule, then candidate selection.
    pub(crate) fn choose_next_hop(
        &self,
        cur: Point2D,
        neighbors: &[Neighbor],
        dest: NodeId,
        dest_pos: Point2D,
        exclude: &BTreeSet<NodeId>,
    ) -> Option<(NodeId, Vec<NodeId>)> {
        let rp = &self.params.radio;
        let model = self.params.power_model;
        let fwd = match self.params.protocol {
            Protocol::Lpor => select_best_forwarder_with(cur, neighbors, dest, dest_pos, rp, model, exclude),
            Protocol::Por => por_select_forwarder(cur, neighbors, dest, dest_pos, exclude),
        }?;
        if fwd == dest {
            return Some((fwd, Vec::new()));
        }
        let fwd_nb = *neighbors.iter().find(|n| n.id == fwd).expect("forwarder is a neighbor");
        let pool: Vec<Neighbor> = neighbors.iter().filter(|n| !exclude.contains(&n.id)).copied().collect();
        let candidates = select_candidates_with(cur, fwd_nb, &pool, dest_pos, rp, model);
        Some((fwd, candidates))
    }

    /// Puts `frame` on the air from `sender`.
    pub(crate) fn broadcast(&mut self, sender: NodeId, frame: Frame) {
        let delay = self.params.tx_delay();
        let range = self.params.radio.range_m;
        let c = self.params.propagation_speed;
        let p_drop = self.params.drop_probability;
        let data_dest = match &frame {
            Frame::Data(d) => Some(d.dest_pos),
            _ => None,
        };
        let frame = Arc::new(frame);
        let now = self.now();
        let ps = self.positions().to_vec();
        let me = ps[sender.index()];
        for (i, p) in ps.iter().enumerate() {
            if i == sender.index() || !in_range(me, *p, range) {
                continue;
            }
            if p_drop > 0.0 && self.medium_rng.random::<f64>() < p_drop {
                continue;
            }
            let d = euclid_distance(me, *p);
            let rx_dist = data_dest.map_or(0.0, |dp| euclid_distance(*p, dp));
            let to = NodeId(i as u32);
            self.schedule(now + delay + d / c, EventKind::PacketDelivery { to, frame: Arc::clone(&frame), rx_dist });
        }
    }

    pub(crate) fn record(&mut self, kind: TraceKind, node: NodeId, key: PacketKey, dest: NodeId) {
        let time = self.now();
        self.trace.push(TraceRecord { time, kind, node, src: key.source, dst: dest, seq: key.seq });
    }

    pub(crate) fn nodes_mut(&mut self) -> &mut [NodeProtocolState<DataPacket>] {
        &mut self.nodes
    }

    pub(crate) fn metrics_mut(&mut self) -> &mut MetricsAccumulator {
        &mut self.metrics
    }

    pub(crate) fn push_delivered(&mut self, d: DeliveredPacket) {
        self.delivered.push(d);
    }

    /// Void nodes known network-wide for each packet, from all records.
    pub fn voids_by_packet(&self) -> BTreeMap<PacketKey, BTreeSet<NodeId>> {
        let mut out: BTreeMap<PacketKey, BTreeSet<NodeId>> = BTreeMap::new();
        for r in &self.void_records {
            out.entry(r.key).or_default().insert(r.void_node);
        }
        out
    }
}
