//! Delivery and forwarding-efficiency metrics.
//!
//! `sent` (Ns) counts packets originated by sources, `forwarded` (Nf) counts
//! every later data transmission (forwarder, candidate takeover and hole
//! reroute alike) and each unique delivery contributes one hop count and one
//! latency sample. Control frames are not counted.

use std::collections::HashSet;

use serde::Serialize;
use thiserror::Error;

use crate::protocol::{PacketKey, Protocol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("no packets were sent")]
    NothingSent,
    #[error("no packets were delivered")]
    NothingDelivered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub key: PacketKey,
    pub hops: u32,
    pub latency: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MetricsAccumulator {
    sent: u64,
    forwarded: u64,
    routing_failures: u64,
    delivered: HashSet<PacketKey>,
    deliveries: Vec<Delivery>,
}

impl MetricsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_send(&mut self) {
        self.sent += 1;
    }

    pub fn record_forward(&mut self) {
        self.forwarded += 1;
    }

    pub fn record_routing_failure(&mut self) {
        self.routing_failures += 1;
    }

    /// Records a delivery. Returns `false` (and records nothing) if this
    /// packet was already delivered.
    pub fn record_delivery(&mut self, key: PacketKey, hops: u32, latency: f64) -> bool {
        debug_assert!(hops >= 1);
        if !self.delivered.insert(key) {
            return false;
        }
        self.deliveries.push(Delivery { key, hops, latency });
        true
    }

    /// Ns
    pub fn sent(&self) -> u64 {
        self.sent
    }

    /// Nf
    pub fn forwarded(&self) -> u64 {
        self.forwarded
    }

    /// Nr
    pub fn received(&self) -> u64 {
        self.deliveries.len() as u64
    }

    pub fn routing_failures(&self) -> u64 {
        self.routing_failures
    }

    pub fn deliveries(&self) -> &[Delivery] {
        &self.deliveries
    }

    pub fn total_hops(&self) -> u64 {
        self.deliveries.iter().map(|d| u64::from(d.hops)).sum()
    }

    /// Packet delivery ratio, Nr / Ns.
    pub fn pdr(&self) -> Result<f64, MetricsError> {
        if self.sent == 0 {
            return Err(MetricsError::NothingSent);
        }
        Ok(self.received() as f64 / self.sent as f64)
    }

    /// Transmissions per delivered hop, (Ns + Nf) / Σ hops.
    pub fn fth(&self) -> Result<f64, MetricsError> {
        let hops = self.total_hops();
        if hops == 0 {
            return Err(MetricsError::NothingDelivered);
        }
        Ok((self.sent + self.forwarded) as f64 / hops as f64)
    }

    /// Transmissions per delivered packet, (Ns + Nf) / Nr.
    pub fn ftp(&self) -> Result<f64, MetricsError> {
        let nr = self.received();
        if nr == 0 {
            return Err(MetricsError::NothingDelivered);
        }
        Ok((self.sent + self.forwarded) as f64 / nr as f64)
    }

    pub fn avg_path_length(&self) -> Result<f64, MetricsError> {
        let nr = self.received();
        if nr == 0 {
            return Err(MetricsError::NothingDelivered);
        }
        Ok(self.total_hops() as f64 / nr as f64)
    }

    pub fn avg_e2e_delay(&self) -> Result<f64, MetricsError> {
        let nr = self.received();
        if nr == 0 {
            return Err(MetricsError::NothingDelivered);
        }
        Ok(self.deliveries.iter().map(|d| d.latency).sum::<f64>() / nr as f64)
    }
}

/// One CSV row per simulation run. Undefined metrics are written as NaN.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRow {
    pub protocol: Protocol,
    pub seed: u64,
    pub speed: f64,
    pub nodes: usize,
    pub pdr: f64,
    pub fth: f64,
    pub ftp: f64,
    pub path_len: f64,
    pub delay_s: f64,
}

impl MetricsRow {
    pub fn from_metrics(m: &MetricsAccumulator, protocol: Protocol, seed: u64, speed: f64, nodes: usize) -> Self {
        Self {
            protocol,
            seed,
            speed,
            nodes,
            pdr: m.pdr().unwrap_or(f64::NAN),
            fth: m.fth().unwrap_or(f64::NAN),
            ftp: m.ftp().unwrap_or(f64::NAN),
            path_len: m.avg_path_length().unwrap_or(f64::NAN),
            delay_s: m.avg_e2e_delay().unwrap_or(f64::NAN),
        }
    }
}

/// Writes rows as CSV with the header
/// `protocol,seed,speed,nodes,pdr,fth,ftp,path_len,delay_s`.
pub fn write_csv<W: std::io::Write>(rows: &[MetricsRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(CSV_HEADER)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub const CSV_HEADER: [&str; 9] = ["protocol", "seed", "speed", "nodes", "pdr", "fth", "ftp", "path_len", "delay_s"];

pub fn to_csv_string(rows: &[MetricsRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::NodeId;

    fn key(seq: u64) -> PacketKey {
        PacketKey { source: NodeId(0), seq }
    }

    fn build(ns: u64, nf: u64, hops: &[u32]) -> MetricsAccumulator {
        let mut m = MetricsAccumulator::new();
        (0..ns).for_each(|_| m.record_send());
        (0..nf).for_each(|_| m.record_forward());
        for (i, h) in hops.iter().enumerate() {
            assert!(m.record_delivery(key(i as u64), *h, 0.01 * (i + 1) as f64));
        }
        m
    }

    #[test]
    fn pdr_examples() {
        let mut m = build(100, 0, &[]);
        for i in 0..80 {
            m.record_delivery(key(i), 1, 0.0);
        }
        assert_eq!(m.pdr().unwrap(), 0.8);
        assert_eq!(build(3, 0, &[1, 1, 1]).pdr().unwrap(), 1.0);
        assert_eq!(MetricsAccumulator::new().pdr(), Err(MetricsError::NothingSent));
    }

    #[test]
    fn fth_examples() {
        assert_eq!(build(10, 0, &[1; 10]).fth().unwrap(), 1.0);
        assert!((build(5, 7, &[3, 3, 2, 4]).fth().unwrap() - 1.0).abs() < 1e-12);
        assert!((build(5, 9, &[3, 3, 2, 4]).fth().unwrap() - 14.0 / 12.0).abs() < 1e-12);
        assert_eq!(build(5, 0, &[]).fth(), Err(MetricsError::NothingDelivered));
    }

    #[test]
    fn ftp_examples() {
        assert!((build(5, 7, &[3, 3, 2, 4]).ftp().unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(build(4, 0, &[1; 4]).ftp().unwrap(), 1.0);
        assert_eq!(build(4, 0, &[]).ftp(), Err(MetricsError::NothingDelivered));
    }

    #[test]
    fn averages() {
        let m = build(5, 7, &[3, 3, 2, 4]);
        assert!((m.avg_path_length().unwrap() - 3.0).abs() < 1e-12);
        assert!((m.avg_e2e_delay().unwrap() - 0.025).abs() < 1e-12);
        let one = build(1, 0, &[2]);
        assert_eq!(one.avg_path_length().unwrap(), 2.0);
        assert_eq!(one.avg_e2e_delay().unwrap(), 0.01);
        assert!(build(1, 0, &[]).avg_path_length().is_err());
        assert!(build(1, 0, &[]).avg_e2e_delay().is_err());
    }

    #[test]
    fn duplicate_delivery_ignored() {
        let mut m = build(1, 0, &[]);
        assert!(m.record_delivery(key(0), 2, 0.1));
        assert!(!m.record_delivery(key(0), 3, 0.2));
        assert_eq!(m.received(), 1);
        assert_eq!(m.total_hops(), 2);
    }

    #[test]
    fn csv_header_and_row() {
        let m = build(5, 7, &[3, 3, 2, 4]);
        let row = MetricsRow::from_metrics(&m, Protocol::Lpor, 1, 50.0, 160);
        let s = to_csv_string(&[row]);
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("lpor,1,50.0,160,"));
        assert_eq!(to_csv_string(&[]).trim_end(), CSV_HEADER.join(","));
    }
}
