//! Link and position based opportunistic routing (L-POR) for mobile ad-hoc
//! networks, with a greedy-distance baseline and a deterministic
//! discrete-event simulator to compare them.
//!
//! Forwarders are ranked by free-space received power among neighbors that
//! make positive progress toward the destination. Up to two backup
//! candidates near the forwarder take over when it stays silent, and a
//! void/disrupt/ack exchange routes around communication holes.

pub mod config;
pub mod engine;
pub mod experiment;
pub mod geom;
pub mod hole;
pub mod metrics;
pub mod mobility;
pub mod network;
pub mod protocol;
pub mod trace;

pub use config::{parse_config, render_config, ConfigError, ScenarioConfig};
pub use engine::{EngineError, Event, EventQueue};
pub use experiment::{run_experiment, run_single, RunOutput};
pub use geom::{
    euclid_distance, friis_power, in_range, positive_progress, two_ray_power, Point2D, PowerModel, RadioError,
    RadioParams,
};
pub use hole::{RerouteRecord, VoidRecord, VoidState};
pub use metrics::{MetricsAccumulator, MetricsError, MetricsRow};
pub use mobility::{init_positions, Area, MobilityState};
pub use network::{Network, NeighborMode, SimError, SimParams, Timers};
pub use protocol::{
    por_select_forwarder, select_best_forwarder, select_candidates, Neighbor, NodeId, PacketHeader, PacketKey,
    Protocol,
};
pub use trace::{TraceKind, TraceRecord};
