//! Forwarder and candidate selection.

use std::collections::BTreeSet;

use crate::geom::{euclid_distance, positive_progress, Point2D, PowerModel, RadioParams};

use super::NodeId;

/// A one-hop neighbor as seen by the selecting node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: NodeId,
    pub pos: Point2D,
}

impl Neighbor {
    pub const fn new(id: NodeId, pos: Point2D) -> Self {
        Self { id, pos }
    }
}

/// Maximum number of candidate nodes carried in a header.
pub const MAX_CANDIDATES: usize = 2;

fn link_power(rp: &RadioParams, model: PowerModel, from: Point2D, to: Point2D) -> f64 {
    // Eligible nodes always make strict progress, so they are never co-located
    // with the current node.
    rp.received_power(model, euclid_distance(from, to)).unwrap_or(f64::INFINITY)
}

/// Picks the best forwarder by reception power.
///
/// Returns the destination itself when it is a neighbor. Otherwise the
/// neighbor with the highest received power among those making positive
/// progress and not in `exclude`; equal powers go to the smaller id.
/// `None` means a routing hole at `cur`.
pub fn select_best_forwarder(
    cur: Point2D,
    neighbors: &[Neighbor],
    dest: NodeId,
    dest_pos: Point2D,
    rp: &RadioParams,
    exclude: &BTreeSet<NodeId>,
) -> Option<NodeId> {
    select_best_forwarder_with(cur, neighbors, dest, dest_pos, rp, PowerModel::Friis, exclude)
}

/// [`select_best_forwarder`] with an explicit reception-power model.
pub fn select_best_forwarder_with(
    cur: Point2D,
    neighbors: &[Neighbor],
    dest: NodeId,
    dest_pos: Point2D,
    rp: &RadioParams,
    model: PowerModel,
    exclude: &BTreeSet<NodeId>,
) -> Option<NodeId> {
    if neighbors.iter().any(|n| n.id == dest) {
        return Some(dest);
    }
    let mut best: Option<(f64, NodeId)> = None;
    for n in neighbors {
        if exclude.contains(&n.id) || !positive_progress(n.pos, cur, dest_pos) {
            continue;
        }
        let power = link_power(rp, model, cur, n.pos);
        let better = match best {
            None => true,
            Some((bp, bid)) => power > bp || (power == bp && n.id < bid),
        };
        if better {
            best = Some((power, n.id));
        }
    }
    best.map(|(_, id)| id)
}

/// Greedy geographic baseline: the positive-progress neighbor closest to the
/// destination, ties to the smaller id.
pub fn por_select_forwarder(
    cur: Point2D,
    neighbors: &[Neighbor],
    dest: NodeId,
    dest_pos: Point2D,
    exclude: &BTreeSet<NodeId>,
) -> Option<NodeId> {
    if neighbors.iter().any(|n| n.id == dest) {
        return Some(dest);
    }
    neighbors
        .iter()
        .filter(|n| !exclude.contains(&n.id) && positive_progress(n.pos, cur, dest_pos))
        .map(|n| (euclid_distance(n.pos, dest_pos), n.id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

/// True when `n` lies in the forwarding area of `cur -> fwd` and sits between
/// the forwarder and the current node in distance to the destination.
pub fn is_candidate(cur: Point2D, fwd: Point2D, n: Point2D, dest: Point2D, range: f64) -> bool {
    let n_dest = euclid_distance(n, dest);
    euclid_distance(n, fwd) <= range / 2.0
        && euclid_distance(cur, n) <= range
        && n_dest < euclid_distance(cur, dest)
        && n_dest > euclid_distance(fwd, dest)
}

/// Chooses up to two backup candidates for forwarder `fwd`, ranked by
/// received power at `cur` (strongest first, ties to the smaller id).
pub fn select_candidates(
    cur: Point2D,
    fwd: Neighbor,
    neighbors: &[Neighbor],
    dest_pos: Point2D,
    rp: &RadioParams,
) -> Vec<NodeId> {
    select_candidates_with(cur, fwd, neighbors, dest_pos, rp, PowerModel::Friis)
}

pub fn select_candidates_with(
    cur: Point2D,
    fwd: Neighbor,
    neighbors: &[Neighbor],
    dest_pos: Point2D,
    rp: &RadioParams,
    model: PowerModel,
) -> Vec<NodeId> {
    let mut ranked: Vec<(f64, NodeId)> = neighbors
        .iter()
        .filter(|n| n.id != fwd.id && is_candidate(cur, fwd.pos, n.pos, dest_pos, rp.range_m))
        .map(|n| (link_power(rp, model, cur, n.pos), n.id))
        .collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.truncate(MAX_CANDIDATES);
    let out: Vec<NodeId> = ranked.into_iter().map(|(_, id)| id).collect();
    debug_assert!(out.iter().all(|id| {
        let n = neighbors.iter().find(|n| n.id == *id).unwrap();
        is_candidate(cur, fwd.pos, n.pos, dest_pos, rp.range_m)
    }));
    out
}
