//! Routing-hole recovery.
//!
//! A forwarder that finds no neighbor with positive progress becomes a void
//! node and warns the node it got the packet from. That node (the trigger)
//! reruns forwarder selection while ignoring every void node known for the
//! packet. If it finds a forwarder the packet continues normally and the
//! destination acknowledges the trigger; otherwise the trigger sends a
//! DISRUPT upstream, where the predecessor treats it as void in turn. A
//! source that runs out of options counts the packet as a routing failure.
//!
//! Void sets only grow per packet, so each trigger retries at most once per
//! neighbor.

use std::collections::BTreeSet;

use crate::network::{DataPacket, Frame, Network};
use crate::protocol::{NodeId, PacketKey};
use crate::trace::TraceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VoidState {
    Rerouting,
    Acked,
    Disrupted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoidRecord {
    pub trigger: NodeId,
    pub void_node: NodeId,
    pub key: PacketKey,
    pub state: VoidState,
    pub time: f64,
}

/// One reselection attempt by a trigger.
#[derive(Debug, Clone, PartialEq)]
pub struct RerouteRecord {
    pub time: f64,
    pub trigger: NodeId,
    pub key: PacketKey,
    pub excluded: BTreeSet<NodeId>,
    pub chosen: Option<NodeId>,
}

impl Network {
    /// `node` found no forwarder for its custody copy `pkt`.
    pub(crate) fn detect_void(&mut self, node: NodeId, mut pkt: DataPacket) {
        let key = pkt.key();
        let dest = pkt.header.dest;
        self.nodes_mut()[node.index()].voided.insert(key);
        self.record(TraceKind::Void, node, key, dest);
        match pkt.prev_hop {
            Some(prev) => {
                pkt.voids.insert(node);
                let voids = pkt.voids.iter().copied().collect();
                self.broadcast(node, Frame::Void { key, dest, void_node: node, to: prev, voids });
            }
            // The source is its own trigger.
            None => self.reroute(node, pkt),
        }
    }

    pub(crate) fn on_void_warning(&mut self, node: NodeId, key: PacketKey, void_node: NodeId, voids: &[NodeId]) {
        let state = &self.nodes_mut()[node.index()];
        if !state.seen.contains(&key) {
            // Never handled this packet.
            return;
        }
        self.handle_void_warning(node, key, void_node, voids);
    }

    pub(crate) fn on_disrupt(&mut self, node: NodeId, key: PacketKey, from: NodeId, voids: &[NodeId]) {
        if !self.nodes_mut()[node.index()].seen.contains(&key) {
            return;
        }
        self.handle_void_warning(node, key, from, voids);
    }

    /// Trigger-side recovery: exclude the void node(s) and select again.
    pub(crate) fn handle_void_warning(&mut self, trigger: NodeId, key: PacketKey, void_node: NodeId, voids: &[NodeId]) {
        let now = self.now();
        let cached = self.nodes_mut()[trigger.index()].cached(&key, now).map(|c| (*c.packet).clone());
        let Some(mut pkt) = cached else {
            self.metrics_mut().record_routing_failure();
            // Destination id is unknown without the packet; use the trigger.
            self.record(TraceKind::Drop, trigger, key, trigger);
            return;
        };
        self.void_records.push(VoidRecord { trigger, void_node, key, state: VoidState::Rerouting, time: now });
        pkt.voids.insert(void_node);
        pkt.voids.extend(voids.iter().copied());
        if let Some(c) = self.nodes_mut()[trigger.index()].cache.get_mut(&key) {
            let mut updated = (*c.packet).clone();
            updated.voids.clone_from(&pkt.voids);
            c.packet = updated.into();
        }
        self.reroute(trigger, pkt);
    }

    fn reroute(&mut self, trigger: NodeId, mut pkt: DataPacket) {
        let key = pkt.key();
        let dest = pkt.header.dest;
        pkt.trigger = Some(trigger);
        pkt.rerouted = true;
        let excluded = pkt.voids.clone();
        let chosen = self.forward_from(trigger, pkt.clone(), false);
        let now = self.now();
        self.reroutes.push(RerouteRecord { time: now, trigger, key, excluded, chosen });
        if chosen.is_some() {
            return;
        }
        for r in self.void_records.iter_mut().filter(|r| r.trigger == trigger && r.key == key) {
            r.state = VoidState::Disrupted;
        }
        self.record(TraceKind::Disrupt, trigger, key, dest);
        match pkt.prev_hop {
            Some(prev) => {
                pkt.voids.insert(trigger);
                let voids = pkt.voids.iter().copied().collect();
                self.broadcast(trigger, Frame::Disrupt { key, dest, from: trigger, to: prev, voids });
            }
            None => {
                self.metrics_mut().record_routing_failure();
                self.record(TraceKind::Drop, trigger, key, dest);
            }
        }
    }

    /// Destination acknowledges a rerouted packet back along its path to the
    /// trigger. `delivered` already contains the final hop.
    pub(crate) fn send_ack(&mut self, dest_node: NodeId, delivered: &DataPacket, trigger: NodeId) {
        let key = delivered.key();
        let start = delivered.path.iter().rposition(|s| s.from == trigger);
        let Some(start) = start else {
            return;
        };
        let route: Vec<NodeId> = delivered.path[start..].iter().rev().map(|s| s.from).collect();
        self.record(TraceKind::Ack, dest_node, key, delivered.header.dest);
        self.broadcast(dest_node, Frame::Ack { key, dest: delivered.header.dest, trigger, route });
    }

    pub(crate) fn on_ack(&mut self, node: NodeId, key: PacketKey, dest: NodeId, trigger: NodeId, rest: &[NodeId]) {
        if node == trigger {
            for r in self.void_records.iter_mut().filter(|r| r.trigger == node && r.key == key) {
                if r.state == VoidState::Rerouting {
                    r.state = VoidState::Acked;
                }
            }
            return;
        }
        self.record(TraceKind::Ack, node, key, dest);
        self.broadcast(node, Frame::Ack { key, dest, trigger, route: rest.to_vec() });
    }
}
