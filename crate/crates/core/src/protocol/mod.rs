//! Per-node routing state: packet header, forwarding table, duplicate
//! suppression and candidate bookkeeping, plus the forwarder selection rules.

mod select;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use select::{
    is_candidate, por_select_forwarder, select_best_forwarder, select_best_forwarder_with,
    select_candidates, select_candidates_with, Neighbor, MAX_CANDIDATES,
};
pub use state::{
    CachedPacket, ForwardingTable, ForwardingTableEntry, NodeProtocolState, PendingCandidate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Identifies one data packet network-wide: `(source, sequence number)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketKey {
    pub source: NodeId,
    pub seq: u64,
}

/// Forwarder selection rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    /// Highest reception power among positive-progress neighbors.
    Lpor,
    /// Greedy distance to destination.
    Por,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Lpor => "lpor",
            Protocol::Por => "por",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lpor" | "l-por" => Ok(Protocol::Lpor),
            "por" => Ok(Protocol::Por),
            other => Err(format!("unknown protocol `{other}` (expected lpor or por)")),
        }
    }
}

/// Routing header rewritten at every hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketHeader {
    pub seq: u64,
    pub source: NodeId,
    pub dest: NodeId,
    /// Best forwarder for the next hop.
    pub forwarder: NodeId,
    pub cn1: Option<NodeId>,
    pub cn2: Option<NodeId>,
    /// Time this hop's transmission started.
    pub send_time: f64,
}

impl PacketHeader {
    pub fn key(&self) -> PacketKey {
        PacketKey { source: self.source, seq: self.seq }
    }

    /// Fills CN1/CN2 from an ordered candidate list.
    pub fn set_candidates(&mut self, candidates: &[NodeId]) {
        self.cn1 = candidates.first().copied();
        self.cn2 = candidates.get(1).copied();
    }

    pub fn candidates(&self) -> impl Iterator<Item = NodeId> {
        self.cn1.into_iter().chain(self.cn2)
    }

    /// 1 for CN1, 2 for CN2.
    pub fn candidate_rank(&self, node: NodeId) -> Option<u32> {
        if self.cn1 == Some(node) {
            Some(1)
        } else if self.cn2 == Some(node) {
            Some(2)
        } else {
            None
        }
    }

    pub fn is_well_formed(&self) -> bool {
        let f = Some(self.forwarder);
        self.cn1 != f
            && self.cn2 != f
            && (self.cn2.is_none() || self.cn1.is_some())
            && (self.cn1.is_none() || self.cn1 != self.cn2)
    }
}
