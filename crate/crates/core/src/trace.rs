//! Line-oriented protocol trace.
//!
//! Each record renders as
//! `t=<sec> ev=<KIND> node=<id> src=<id> dst=<id> seq=<n>` with the time
//! printed to microseconds. The field order is fixed.

use std::fmt;
use std::str::FromStr;

use crate::protocol::{NodeId, PacketKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceKind {
    /// Source originated a packet.
    Send,
    /// Destination delivered a packet.
    Recv,
    /// A data transmission after origination.
    Fwd,
    /// A packet discarded as duplicate or after routing failed.
    Drop,
    Void,
    Disrupt,
    Ack,
    Suppress,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Send => "SEND",
            TraceKind::Recv => "RECV",
            TraceKind::Fwd => "FWD",
            TraceKind::Drop => "DROP",
            TraceKind::Void => "VOID",
            TraceKind::Disrupt => "DISRUPT",
            TraceKind::Ack => "ACK",
            TraceKind::Suppress => "SUPPRESS",
        }
    }
}

impl FromStr for TraceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "SEND" => TraceKind::Send,
            "RECV" => TraceKind::Recv,
            "FWD" => TraceKind::Fwd,
            "DROP" => TraceKind::Drop,
            "VOID" => TraceKind::Void,
            "DISRUPT" => TraceKind::Disrupt,
            "ACK" => TraceKind::Ack,
            "SUPPRESS" => TraceKind::Suppress,
            other => return Err(format!("unknown trace event `{other}`")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub time: f64,
    pub kind: TraceKind,
    pub node: NodeId,
    pub src: NodeId,
    pub dst: NodeId,
    pub seq: u64,
}

impl TraceRecord {
    pub fn key(&self) -> PacketKey {
        PacketKey { source: self.src, seq: self.seq }
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t={:.6} ev={} node={} src={} dst={} seq={}",
            self.time,
            self.kind.as_str(),
            self.node,
            self.src,
            self.dst,
            self.seq
        )
    }
}

impl FromStr for TraceRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let mut fields = line.split_whitespace();
        let mut take = |name: &str| -> Result<&str, String> {
            let field = fields.next().ok_or_else(|| format!("missing `{name}` in `{line}`"))?;
            field
                .strip_prefix(name)
                .and_then(|rest| rest.strip_prefix('='))
                .ok_or_else(|| format!("expected `{name}=` in `{line}`"))
        };
        let num = |v: &str| v.parse::<u32>().map(NodeId).map_err(|e| e.to_string());
        let time = take("t")?.parse::<f64>().map_err(|e| e.to_string())?;
        let kind = take("ev")?.parse()?;
        let node = num(take("node")?)?;
        let src = num(take("src")?)?;
        let dst = num(take("dst")?)?;
        let seq = take("seq")?.parse::<u64>().map_err(|e| e.to_string())?;
        Ok(TraceRecord { time, kind, node, src, dst, seq })
    }
}

/// Collects trace records when enabled; a disabled log costs nothing.
#[derive(Debug, Clone, Default)]
pub struct TraceLog {
    enabled: bool,
    records: Vec<TraceRecord>,
}

impl TraceLog {
    pub fn new(enabled: bool) -> Self {
        Self { enabled, records: Vec::new() }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn push(&mut self, record: TraceRecord) {
        if self.enabled {
            self.records.push(record);
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 48);
        for r in &self.records {
            out.push_str(&r.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_stable() {
        let r = TraceRecord {
            time: 0.0120487,
            kind: TraceKind::Suppress,
            node: NodeId(3),
            src: NodeId(0),
            dst: NodeId(4),
            seq: 0,
        };
        assert_eq!(r.to_string(), "t=0.012049 ev=SUPPRESS node=3 src=0 dst=4 seq=0");
    }

    #[test]
    fn parse_round_trip() {
        let line = "t=1.500000 ev=DISRUPT node=7 src=2 dst=9 seq=41";
        let r: TraceRecord = line.parse().unwrap();
        assert_eq!(r.kind, TraceKind::Disrupt);
        assert_eq!(r.to_string(), line);
        assert!("t=1 ev=NOPE node=1 src=1 dst=1 seq=1".parse::<TraceRecord>().is_err());
        assert!("t=1 ev=ACK".parse::<TraceRecord>().is_err());
    }

    #[test]
    fn disabled_log_keeps_nothing() {
        let mut log = TraceLog::new(false);
        log.push(TraceRecord {
            time: 0.0,
            kind: TraceKind::Send,
            node: NodeId(0),
            src: NodeId(0),
            dst: NodeId(1),
            seq: 0,
        });
        assert!(log.records().is_empty());
    }
}
