//! Scenario configuration.
//!
//! The file format is flat TOML: one `key = value` per line, `#` comments.
//! Every key is optional and defaults to the reference scenario (160 nodes
//! in 800 x 800 m, 225 m range, 0.28 W, unit gains, no system loss, 200 s,
//! speeds 10/30/50/100 m/s).
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `nodes` | 160 | node count |
//! | `width`, `height` | 800 | area in meters |
//! | `range` | 225 | transmission range in meters |
//! | `speeds` / `speed` | [10, 30, 50, 100] | node speeds in m/s, one run each |
//! | `pause_time` | 0 | random-waypoint pause in seconds |
//! | `sim_time` / `duration` | 200 | simulated seconds |
//! | `seeds` / `seed` | [1] | RNG seeds, one run each |
//! | `protocols` / `protocol` | ["lpor", "por"] | routing rules to compare |
//! | `tx_power` | 0.28 | transmit power in W |
//! | `tx_gain`, `rx_gain` | 1.0 | linear antenna gains |
//! | `wavelength` | 0.328 | carrier wavelength in m (914 MHz) |
//! | `system_loss` | 1.0 | linear system loss, at least 1 |
//! | `antenna_height` | 1.5 | antenna height in m (two-ray model) |
//! | `power_model` | "friis" | link metric: "friis" or "two_ray" |
//! | `flows` | 5 | constant-rate flows between random node pairs |
//! | `rate` | 4.0 | packets per second per flow |
//! | `packet_bytes` | 512 | frame size |
//! | `bandwidth` | 2e6 | channel bit rate in bit/s |
//! | `candidate_threshold` | 0.010 | candidate wait per rank in s |
//! | `table_lifetime` | 2.0 | forwarding-table and cache lifetime in s |
//! | `beacon_interval` | 1.0 | HELLO period in s (beacon mode); also the traffic warm-up |
//! | `neighbor_timeout` | 2.0 | beacon neighbor expiry in s |
//! | `neighbor_mode` | "oracle" | "oracle" or "beacon" |
//! | `drop_probability` | 0.0 | independent per-link frame loss |
//!
//! Speeds are fixed per run (not drawn from a range) and the pause time is
//! zero unless configured.

use std::fmt::Write as _;

use thiserror::Error;
use toml::{Table, Value};

use crate::geom::{PowerModel, RadioParams};
use crate::mobility::Area;
use crate::network::{NeighborMode, SimParams, Timers};
use crate::protocol::Protocol;
use crate::geom::SPEED_OF_LIGHT;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub nodes: usize,
    pub width: f64,
    pub height: f64,
    pub range_m: f64,
    pub speeds: Vec<f64>,
    pub pause_time: f64,
    pub sim_time: f64,
    pub seeds: Vec<u64>,
    pub protocols: Vec<Protocol>,
    pub tx_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub wavelength: f64,
    pub system_loss: f64,
    pub antenna_height: f64,
    pub power_model: PowerModel,
    pub flows: usize,
    pub rate: f64,
    pub packet_bytes: u32,
    pub bandwidth: f64,
    pub candidate_threshold: f64,
    pub table_lifetime: f64,
    pub beacon_interval: f64,
    pub neighbor_timeout: f64,
    pub neighbor_mode: NeighborMode,
    pub drop_probability: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let radio = RadioParams::default();
        let timers = Timers::default();
        Self {
            nodes: 160,
            width: 800.0,
            height: 800.0,
            range_m: radio.range_m,
            speeds: vec![10.0, 30.0, 50.0, 100.0],
            pause_time: 0.0,
            sim_time: 200.0,
            seeds: vec![1],
            protocols: vec![Protocol::Lpor, Protocol::Por],
            tx_power: radio.tx_power_watts,
            tx_gain: radio.tx_gain,
            rx_gain: radio.rx_gain,
            wavelength: radio.wavelength_m,
            system_loss: radio.system_loss,
            antenna_height: radio.antenna_height_m,
            power_model: PowerModel::Friis,
            flows: 5,
            rate: 4.0,
            packet_bytes: 512,
            bandwidth: 2e6,
            candidate_threshold: timers.candidate_threshold,
            table_lifetime: timers.table_lifetime,
            beacon_interval: timers.beacon_interval,
            neighbor_timeout: timers.neighbor_timeout,
            neighbor_mode: NeighborMode::Oracle,
            drop_probability: 0.0,
        }
    }
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key, reason: reason.into() }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("{v} must be positive")))
    }
}

fn non_negative(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(key, format!("{v} must be non-negative")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.nodes == 0 {
            return Err(invalid("nodes", "at least one node is required"));
        }
        positive("width", self.width)?;
        positive("height", self.height)?;
        positive("range", self.range_m)?;
        if self.speeds.is_empty() {
            return Err(invalid("speeds", "at least one speed is required"));
        }
        for s in &self.speeds {
            non_negative("speeds", *s)?;
        }
        non_negative("pause_time", self.pause_time)?;
        positive("sim_time", self.sim_time)?;
        if self.seeds.is_empty() {
            return Err(invalid("seeds", "at least one seed is required"));
        }
        if self.protocols.is_empty() {
            return Err(invalid("protocols", "at least one protocol is required"));
        }
        positive("tx_power", self.tx_power)?;
        positive("tx_gain", self.tx_gain)?;
        positive("rx_gain", self.rx_gain)?;
        positive("wavelength", self.wavelength)?;
        positive("antenna_height", self.antenna_height)?;
        if !(self.system_loss.is_finite() && self.system_loss >= 1.0) {
            return Err(invalid("system_loss", format!("{} must be at least 1", self.system_loss)));
        }
        positive("rate", self.rate)?;
        if self.packet_bytes == 0 {
            return Err(invalid("packet_bytes", "must be positive"));
        }
        positive("bandwidth", self.bandwidth)?;
        positive("candidate_threshold", self.candidate_threshold)?;
        positive("table_lifetime", self.table_lifetime)?;
        positive("beacon_interval", self.beacon_interval)?;
        positive("neighbor_timeout", self.neighbor_timeout)?;
        if !(0.0..1.0).contains(&self.drop_probability) {
            return Err(invalid("drop_probability", format!("{} is outside [0, 1)", self.drop_probability)));
        }
        if self.flows > 0 && self.nodes < 2 {
            return Err(invalid("flows", "traffic needs at least two nodes"));
        }
        if self.flows > self.nodes * (self.nodes - 1) {
            return Err(invalid("flows", format!("only {} distinct node pairs exist", self.nodes * (self.nodes - 1))));
        }
        Ok(())
    }

    pub fn area(&self) -> Area {
        Area::new(self.width, self.height)
    }

    pub fn radio(&self) -> RadioParams {
        RadioParams {
            tx_power_watts: self.tx_power,
            tx_gain: self.tx_gain,
            rx_gain: self.rx_gain,
            wavelength_m: self.wavelength,
            system_loss: self.system_loss,
            range_m: self.range_m,
            antenna_height_m: self.antenna_height,
        }
    }

    pub fn sim_params(&self, protocol: Protocol) -> SimParams {
        SimParams {
            protocol,
            radio: self.radio(),
            power_model: self.power_model,
            area: self.area(),
            timers: Timers {
                candidate_threshold: self.candidate_threshold,
                table_lifetime: self.table_lifetime,
                beacon_interval: self.beacon_interval,
                neighbor_timeout: self.neighbor_timeout,
            },
            neighbor_mode: self.neighbor_mode,
            drop_probability: self.drop_probability,
            packet_bytes: self.packet_bytes,
            bandwidth_bps: self.bandwidth,
            propagation_speed: SPEED_OF_LIGHT,
        }
    }
}

const KEYS: &[(&str, &str)] = &[
    ("nodes", "nodes"),
    ("width", "width"),
    ("height", "height"),
    ("range", "range"),
    ("speeds", "speeds"),
    ("speed", "speeds"),
    ("pause_time", "pause_time"),
    ("sim_time", "sim_time"),
    ("duration", "sim_time"),
    ("seeds", "seeds"),
    ("seed", "seeds"),
    ("protocols", "protocols"),
    ("protocol", "protocols"),
    ("tx_power", "tx_power"),
    ("tx_gain", "tx_gain"),
    ("rx_gain", "rx_gain"),
    ("wavelength", "wavelength"),
    ("system_loss", "system_loss"),
    ("antenna_height", "antenna_height"),
    ("power_model", "power_model"),
    ("flows", "flows"),
    ("rate", "rate"),
    ("packet_bytes", "packet_bytes"),
    ("bandwidth", "bandwidth"),
    ("candidate_threshold", "candidate_threshold"),
    ("table_lifetime", "table_lifetime"),
    ("beacon_interval", "beacon_interval"),
    ("neighbor_timeout", "neighbor_timeout"),
    ("neighbor_mode", "neighbor_mode"),
    ("drop_probability", "drop_probability"),
];

fn canonical(key: &str) -> Option<&'static str> {
    KEYS.iter().find(|(k, _)| *k == key).map(|(_, c)| *c)
}

/// 1-based line on which `key` is assigned, or 1 when it cannot be found.
fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |i| i + 1)
}

fn line_at_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn as_f64(v: &Value) -> Result<f64, String> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(format!("expected a number, found {}", other.type_str())),
    }
}

fn as_count(v: &Value) -> Result<u64, String> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        Value::Integer(i) => Err(format!("{i} must be non-negative")),
        other => Err(format!("expected an integer, found {}", other.type_str())),
    }
}

fn as_str(v: &Value) -> Result<&str, String> {
    v.as_str().ok_or_else(|| format!("expected a string, found {}", v.type_str()))
}

/// A scalar or an array of scalars.
fn as_list<T>(v: &Value, item: impl Fn(&Value) -> Result<T, String>) -> Result<Vec<T>, String> {
    match v {
        Value::Array(items) => items.iter().map(item).collect(),
        scalar => Ok(vec![item(scalar)?]),
    }
}

fn apply(cfg: &mut ScenarioConfig, key: &'static str, v: &Value) -> Result<(), String> {
    match key {
        "nodes" => cfg.nodes = usize::try_from(as_count(v)?).map_err(|e| e.to_string())?,
        "width" => cfg.width = as_f64(v)?,
        "height" => cfg.height = as_f64(v)?,
        "range" => cfg.range_m = as_f64(v)?,
        "speeds" => cfg.speeds = as_list(v, as_f64)?,
        "pause_time" => cfg.pause_time = as_f64(v)?,
        "sim_time" => cfg.sim_time = as_f64(v)?,
        "seeds" => cfg.seeds = as_list(v, as_count)?,
        "protocols" => cfg.protocols = as_list(v, |p| as_str(p)?.parse::<Protocol>())?,
        "tx_power" => cfg.tx_power = as_f64(v)?,
        "tx_gain" => cfg.tx_gain = as_f64(v)?,
        "rx_gain" => cfg.rx_gain = as_f64(v)?,
        "wavelength" => cfg.wavelength = as_f64(v)?,
        "system_loss" => cfg.system_loss = as_f64(v)?,
        "antenna_height" => cfg.antenna_height = as_f64(v)?,
        "power_model" => {
            cfg.power_model = match as_str(v)? {
                "friis" => PowerModel::Friis,
                "two_ray" => PowerModel::TwoRay,
                other => return Err(format!("unknown power model `{other}` (expected friis or two_ray)")),
            }
        }
        "flows" => cfg.flows = usize::try_from(as_count(v)?).map_err(|e| e.to_string())?,
        "rate" => cfg.rate = as_f64(v)?,
        "packet_bytes" => cfg.packet_bytes = u32::try_from(as_count(v)?).map_err(|e| e.to_string())?,
        "bandwidth" => cfg.bandwidth = as_f64(v)?,
        "candidate_threshold" => cfg.candidate_threshold = as_f64(v)?,
        "table_lifetime" => cfg.table_lifetime = as_f64(v)?,
        "beacon_interval" => cfg.beacon_interval = as_f64(v)?,
        "neighbor_timeout" => cfg.neighbor_timeout = as_f64(v)?,
        "neighbor_mode" => {
            cfg.neighbor_mode = match as_str(v)? {
                "oracle" => NeighborMode::Oracle,
                "beacon" => NeighborMode::Beacon,
                other => return Err(format!("unknown neighbor mode `{other}` (expected oracle or beacon)")),
            }
        }
        "drop_probability" => cfg.drop_probability = as_f64(v)?,
        _ => unreachable!("canonical keys are exhaustive"),
    }
    Ok(())
}

/// Parses configuration text. Omitted keys keep their defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse {
        line: e.span().map_or(1, |s| line_at_offset(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    let mut cfg = ScenarioConfig::default();
    let mut assigned: Vec<(&'static str, &str)> = Vec::new();
    for (key, value) in &table {
        let line = line_of(text, key);
        let Some(canon) = canonical(key) else {
            return Err(ConfigError::Parse { line, message: format!("unknown key `{key}`") });
        };
        if let Some((_, other)) = assigned.iter().find(|(c, _)| *c == canon) {
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` conflicts with `{other}`"),
            });
        }
        assigned.push((canon, key.as_str()));
        apply(&mut cfg, canon, value).map_err(|message| ConfigError::Parse {
            line,
            message: format!("`{key}`: {message}"),
        })?;
    }
    cfg.validate().map_err(|e| match e {
        ConfigError::Invalid { key, reason } => {
            let written = assigned.iter().find(|(c, _)| *c == key).map_or(key, |(_, k)| k);
            ConfigError::Parse { line: line_of(text, written), message: format!("`{written}`: {reason}") }
        }
        other => other,
    })?;
    Ok(cfg)
}

fn fmt_list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    let inner: Vec<String> = items.iter().map(f).collect();
    format!("[{}]", inner.join(", "))
}

/// Renders a configuration in the same format `parse_config` reads.
pub fn render_config(cfg: &ScenarioConfig) -> String {
    let f = |v: f64| format!("{v:?}");
    let mut s = String::new();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    line("nodes", cfg.nodes.to_string());
    line("width", f(cfg.width));
    line("height", f(cfg.height));
    line("range", f(cfg.range_m));
    line("speeds", fmt_list(&cfg.speeds, |v| f(*v)));
    line("pause_time", f(cfg.pause_time));
    line("sim_time", f(cfg.sim_time));
    line("seeds", fmt_list(&cfg.seeds, u64::to_string));
    line("protocols", fmt_list(&cfg.protocols, |p| format!("\"{p}\"")));
    line("tx_power", f(cfg.tx_power));
    line("tx_gain", f(cfg.tx_gain));
    line("rx_gain", f(cfg.rx_gain));
    line("wavelength", f(cfg.wavelength));
    line("system_loss", f(cfg.system_loss));
    line("antenna_height", f(cfg.antenna_height));
    let model = match cfg.power_model {
        PowerModel::Friis => "friis",
        PowerModel::TwoRay => "two_ray",
    };
    line("power_model", format!("\"{model}\""));
    line("flows", cfg.flows.to_string());
    line("rate", f(cfg.rate));
    line("packet_bytes", cfg.packet_bytes.to_string());
    line("bandwidth", f(cfg.bandwidth));
    line("candidate_threshold", f(cfg.candidate_threshold));
    line("table_lifetime", f(cfg.table_lifetime));
    line("beacon_interval", f(cfg.beacon_interval));
    line("neighbor_timeout", f(cfg.neighbor_timeout));
    let mode = match cfg.neighbor_mode {
        NeighborMode::Oracle => "oracle",
        NeighborMode::Beacon => "beacon",
    };
    line("neighbor_mode", format!("\"{mode}\""));
    line("drop_probability", f(cfg.drop_probability));
    s
}
