use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::Arc;

use crate::geom::Point2D;

use super::{NodeId, PacketKey};

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardingTableEntry {
    pub next_hop: NodeId,
    pub candidates: Vec<NodeId>,
    pub expiry: f64,
}

/// Per-flow `(source, destination) -> next hop + candidates` with expiry.
#[derive(Debug, Clone, Default)]
pub struct ForwardingTable {
    entries: BTreeMap<(NodeId, NodeId), ForwardingTableEntry>,
}

impl ForwardingTable {
    pub fn insert(&mut self, source: NodeId, dest: NodeId, entry: ForwardingTableEntry) {
        debug_assert!(!entry.candidates.contains(&entry.next_hop));
        self.entries.insert((source, dest), entry);
    }

    /// The live entry for a flow; expired entries are invisible.
    pub fn get(&self, source: NodeId, dest: NodeId, now: f64) -> Option<&ForwardingTableEntry> {
        self.entries.get(&(source, dest)).filter(|e| e.expiry > now)
    }

    pub fn purge_expired(&mut self, now: f64) {
        self.entries.retain(|_, e| e.expiry > now);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A packet held by a candidate while it waits for the forwarder.
#[derive(Debug, Clone)]
pub struct PendingCandidate<P> {
    pub packet: Arc<P>,
    /// Transmitter and send time of the copy that armed the timer.
    pub armed_by: (NodeId, f64),
    pub rank: u32,
    pub fires_at: f64,
    /// Event sequence number of the timer, to ignore stale expiries.
    pub timer: u64,
}

/// A forwarded packet kept for hole recovery until `expiry`.
#[derive(Debug, Clone)]
pub struct CachedPacket<P> {
    pub packet: Arc<P>,
    pub expiry: f64,
}

/// Everything a node remembers between events. `P` is the simulator's
/// in-flight packet type.
#[derive(Debug, Clone)]
pub struct NodeProtocolState<P> {
    /// Neighbor positions learned from beacons: id -> (position, heard at).
    pub neighbors: BTreeMap<NodeId, (Point2D, f64)>,
    /// Packets this node has forwarded or delivered.
    pub seen: HashSet<PacketKey>,
    pub table: ForwardingTable,
    pub pending: BTreeMap<PacketKey, PendingCandidate<P>>,
    pub cache: BTreeMap<PacketKey, CachedPacket<P>>,
    /// Packets for which this node found no forwarder.
    pub voided: BTreeSet<PacketKey>,
    next_seq: u64,
}

impl<P> Default for NodeProtocolState<P> {
    fn default() -> Self {
        Self {
            neighbors: BTreeMap::new(),
            seen: HashSet::new(),
            table: ForwardingTable::default(),
            pending: BTreeMap::new(),
            cache: BTreeMap::new(),
            voided: BTreeSet::new(),
            next_seq: 0,
        }
    }
}

impl<P> NodeProtocolState<P> {
    /// Allocates the next sequence number for packets sourced here.
    pub fn next_seq(&mut self) -> u64 {
        let s = self.next_seq;
        self.next_seq += 1;
        s
    }

    pub fn cached(&self, key: &PacketKey, now: f64) -> Option<&CachedPacket<P>> {
        self.cache.get(key).filter(|c| c.expiry > now)
    }

    /// Neighbors heard within `timeout` of `now`.
    pub fn fresh_neighbors(&self, now: f64, timeout: f64) -> impl Iterator<Item = (NodeId, Point2D)> + '_ {
        self.neighbors
            .iter()
            .filter(move |(_, (_, heard))| now - heard <= timeout)
            .map(|(id, (pos, _))| (*id, *pos))
    }
}
