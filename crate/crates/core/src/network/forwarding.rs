//! Data-path handlers: origination, reception, candidate overhearing and
//! takeover.

use std::sync::Arc;

use crate::geom::euclid_distance;
use crate::protocol::{CachedPacket, ForwardingTableEntry, NodeId, PacketHeader, PacketKey, PendingCandidate};
use crate::trace::TraceKind;

use super::{DataPacket, DeliveredPacket, EventKind, Frame, Network, ProgressStep, SimError};

impl Network {
    /// Originates one packet from `src` to `dest` at the current time.
    pub fn originate(&mut self, src: NodeId, dest: NodeId) -> Result<(), SimError> {
        self.check_node(src)?;
        self.check_node(dest)?;
        if src == dest {
            return Err(SimError::SelfFlow(src));
        }
        let now = self.now();
        let seq = self.nodes_mut()[src.index()].next_seq();
        // Location service lookup.
        let dest_pos = self.position(dest);
        let header = PacketHeader {
            seq,
            source: src,
            dest,
            forwarder: src,
            cn1: None,
            cn2: None,
            send_time: now,
        };
        let pkt = DataPacket {
            header,
            transmitter: src,
            tx_dist: 0.0,
            prev_hop: None,
            dest_pos,
            hops: 0,
            origin_time: now,
            trigger: None,
            voids: Default::default(),
            rerouted: false,
            path: Vec::new(),
        };
        self.metrics_mut().record_send();
        self.record(TraceKind::Send, src, header.key(), dest);
        self.nodes_mut()[src.index()].seen.insert(header.key());
        if self.forward_from(src, pkt.clone(), true).is_none() {
            self.detect_void(src, pkt);
        }
        Ok(())
    }

    /// Selects F/CN1/CN2 at `node` and transmits its custody copy `pkt`.
    /// Returns the chosen forwarder, or `None` on a routing hole (nothing is
    /// sent then).
    pub(crate) fn forward_from(&mut self, node: NodeId, pkt: DataPacket, origination: bool) -> Option<NodeId> {
        let now = self.now();
        let cur = self.position(node);
        let neighbors = self.neighbor_view(node);
        let dest = pkt.header.dest;
        // Never hand the packet straight back; stale beacon positions can
        // otherwise make two neighbors each look closer than the other.
        let mut exclude = pkt.voids.clone();
        exclude.extend(pkt.prev_hop);
        let (fwd, candidates) = self.choose_next_hop(cur, &neighbors, dest, pkt.dest_pos, &exclude)?;
        let key = pkt.key();
        let lifetime = self.params().timers.table_lifetime;

        let state = &mut self.nodes_mut()[node.index()];
        state.table.insert(
            pkt.header.source,
            dest,
            ForwardingTableEntry { next_hop: fwd, candidates: candidates.clone(), expiry: now + lifetime },
        );
        state.cache.insert(key, CachedPacket { packet: Arc::new(pkt.clone()), expiry: now + lifetime });
        self.schedule(now + lifetime, EventKind::TableExpiry { node, key });

        let mut out = pkt;
        out.header.forwarder = fwd;
        out.header.set_candidates(&candidates);
        out.header.send_time = now;
        debug_assert!(out.header.is_well_formed());
        out.transmitter = node;
        out.tx_dist = euclid_distance(cur, out.dest_pos);
        out.hops += 1;
        if !origination {
            self.metrics_mut().record_forward();
            self.record(TraceKind::Fwd, node, key, dest);
        }
        self.broadcast(node, Frame::Data(out));
        Some(fwd)
    }

    /// Takes custody of a received copy: remembers who handed it over and
    /// extends the recorded path.
    fn custody_copy(node: NodeId, pkt: &DataPacket, rx_dist: f64) -> DataPacket {
        let mut c = pkt.clone();
        c.prev_hop = Some(pkt.transmitter);
        c.path.push(ProgressStep { from: pkt.transmitter, to: node, from_dist: pkt.tx_dist, to_dist: rx_dist });
        c
    }

    pub(crate) fn on_data(&mut self, node: NodeId, pkt: &DataPacket, rx_dist: f64) {
        let key = pkt.key();
        let now = self.now();
        let h = &pkt.header;

        let overheard = self.nodes_mut()[node.index()]
            .pending
            .get(&key)
            .is_some_and(|p| p.armed_by != (pkt.transmitter, h.send_time));
        if overheard {
            self.on_overhear(node, key, h.dest);
        }

        if node == h.dest {
            if !self.nodes_mut()[node.index()].seen.insert(key) {
                self.record(TraceKind::Drop, node, key, h.dest);
                return;
            }
            let copy = Self::custody_copy(node, pkt, rx_dist);
            let fresh = self.metrics_mut().record_delivery(key, pkt.hops, now - pkt.origin_time);
            debug_assert!(fresh);
            self.record(TraceKind::Recv, node, key, h.dest);
            if let Some(trigger) = pkt.trigger {
                self.send_ack(node, &copy, trigger);
            }
            self.push_delivered(DeliveredPacket { key, hops: pkt.hops, rerouted: pkt.rerouted, path: copy.path });
            return;
        }

        if node == h.forwarder {
            if !self.nodes_mut()[node.index()].seen.insert(key) {
                self.record(TraceKind::Drop, node, key, h.dest);
                return;
            }
            let copy = Self::custody_copy(node, pkt, rx_dist);
            if self.forward_from(node, copy.clone(), false).is_none() {
                self.detect_void(node, copy);
            }
            return;
        }

        if let Some(rank) = h.candidate_rank(node) {
            let state = &self.nodes_mut()[node.index()];
            if state.seen.contains(&key) || state.pending.contains_key(&key) {
                return;
            }
            let copy = Self::custody_copy(node, pkt, rx_dist);
            let fires_at = (h.send_time + self.params().timers.candidate_threshold * f64::from(rank)).max(now);
            let timer = self.schedule(fires_at, EventKind::TimerExpiry { node, key });
            self.nodes_mut()[node.index()].pending.insert(
                key,
                PendingCandidate {
                    packet: Arc::new(copy),
                    armed_by: (pkt.transmitter, h.send_time),
                    rank,
                    fires_at,
                    timer,
                },
            );
        }
    }

    /// A waiting candidate heard another transmission of its packet.
    pub(crate) fn on_overhear(&mut self, node: NodeId, key: PacketKey, dest: NodeId) {
        if self.nodes_mut()[node.index()].pending.remove(&key).is_some() {
            self.record(TraceKind::Suppress, node, key, dest);
        }
    }

    /// The candidate's wait ran out without hearing the forwarder.
    pub(crate) fn on_candidate_timeout(&mut self, node: NodeId, key: PacketKey, timer: u64) {
        let state = &mut self.nodes_mut()[node.index()];
        let Some(p) = state.pending.get(&key) else {
            return;
        };
        if p.timer != timer {
            return;
        }
        let p = state.pending.remove(&key).expect("checked above");
        if !state.seen.insert(key) {
            return;
        }
        let custody = (*p.packet).clone();
        if self.forward_from(node, custody.clone(), false).is_none() {
            self.detect_void(node, custody);
        }
    }
}
