//! Forward and backward ants.
//!
//! A forward ant walks from its source toward its destination, choosing each
//! hop from pheromone and desirability, and leaves demand and hop-count
//! estimates at every node it enters. An arrived ant turns into a backward
//! ant that retraces the path toward the source, refreshing hop estimates,
//! desirability and pheromone, and tracking the cheapest node on the path at
//! which to anchor an overlay link. The source then links to that node.

mod behavior;

pub use behavior::{
    ColonyBehavior, ColonyKind, ColonyRegistry, Exploiter, NegativeExplorer, PositiveExplorer,
    RegistryError,
};

use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::colony::{
    update_demand, update_eta, update_hops_from, update_hops_to, update_sigma, ColonyError,
    ColonyParams, EtaDenominator, StateTable,
};
use crate::cost::{ant_overlay_cost, CostParams};
use crate::topology::{LogicalLink, NodeId, OverlayNetwork, PhysicalNetwork, TopologyError};

#[derive(Debug, Error, PartialEq)]
pub enum WalkFault {
    #[error("backward walk expects an arrived ant, got status {0}")]
    NotArrived(AntStatus),
    #[error("path step {from}->{to} is not a physical edge")]
    NotAdjacent { from: NodeId, to: NodeId },
    #[error("node {node} has no hop estimate from source {src}")]
    MissingHopsFrom { node: NodeId, src: NodeId },
    #[error(transparent)]
    State(#[from] ColonyError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Parameters an ant reads while walking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntParams {
    pub colony: ColonyParams,
    pub cost: CostParams,
    pub eta_denominator: EtaDenominator,
    /// A trail is bad when it is longer than `gamma` times the best known.
    pub gamma: f64,
}

impl Default for AntParams {
    fn default() -> Self {
        AntParams {
            colony: ColonyParams::default(),
            cost: CostParams::default(),
            eta_denominator: EtaDenominator::ToDst,
            gamma: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntStatus {
    Alive,
    Arrived,
    DeadEnd,
    Blocked,
}

impl AntStatus {
    pub fn name(self) -> &'static str {
        match self {
            AntStatus::Alive => "alive",
            AntStatus::Arrived => "arrived",
            AntStatus::DeadEnd => "dead_end",
            AntStatus::Blocked => "blocked",
        }
    }
}

impl fmt::Display for AntStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One move of a forward ant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Physical edge; `tau` is the pheromone toward the destination read when
    /// the edge was chosen.
    Physical { tau: f64 },
    /// Overlay shortcut spanning `hop_length` physical hops.
    Overlay { hop_length: u32 },
}

impl Step {
    pub fn hop_length(self) -> u32 {
        match self {
            Step::Physical { .. } => 1,
            Step::Overlay { hop_length } => hop_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardAnt {
    pub colony: ColonyKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub volume: f64,
    /// Nodes entered after leaving `src`.
    pub path: Vec<NodeId>,
    /// `steps[k]` is the move that entered `path[k]`.
    pub steps: Vec<Step>,
    pub hop_count: u32,
    visited: Vec<bool>,
    pub status: AntStatus,
}

impl ForwardAnt {
    pub fn new(
        colony: ColonyKind,
        src: NodeId,
        dst: NodeId,
        volume: f64,
        node_count: usize,
    ) -> Self {
        let mut visited = vec![false; node_count];
        if let Some(v) = visited.get_mut(src.index()) {
            *v = true;
        }
        ForwardAnt {
            colony,
            src,
            dst,
            volume,
            path: Vec::new(),
            steps: Vec::new(),
            hop_count: 0,
            visited,
            status: AntStatus::Alive,
        }
    }

    pub fn current(&self) -> NodeId {
        self.path.last().copied().unwrap_or(self.src)
    }

    pub fn has_visited(&self, node: NodeId) -> bool {
        self.visited.get(node.index()).copied().unwrap_or(false)
    }

    pub fn visited(&self) -> &[bool] {
        &self.visited
    }

    /// `src` followed by the path.
    pub fn full_path(&self) -> Vec<NodeId> {
        std::iter::once(self.src)
            .chain(self.path.iter().copied())
            .collect()
    }

    fn advance(&mut self, next: NodeId, step: Step) {
        self.path.push(next);
        self.steps.push(step);
        self.hop_count += step.hop_length();
        self.visited[next.index()] = true;
    }
}

/// Outcome of a next-hop choice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Choice {
    Overlay {
        next: NodeId,
        hop_length: u32,
    },
    Physical {
        next: NodeId,
        tau: f64,
    },
    /// No unvisited neighbor at all.
    DeadEnd,
    /// Unvisited neighbors exist but the colony admits none of them.
    Blocked,
}

/// Picks the next node for an ant at `node` heading to `dst`.
///
/// An unvisited overlay endpoint registered for `(node, dst)` is taken first.
/// Otherwise the unvisited physical neighbors the colony admits are weighted
/// by `max(tau, 0)^alpha * max(eta, 0)^beta`. The destination, whose own
/// desirability is unbounded, is taken whenever it is a candidate. If every
/// weight is zero the choice is uniform.
#[allow(clippy::too_many_arguments)]
pub fn select_next_hop<R: Rng + ?Sized>(
    node: NodeId,
    dst: NodeId,
    visited: &[bool],
    behavior: &dyn ColonyBehavior,
    states: &StateTable,
    overlay: &OverlayNetwork,
    net: &PhysicalNetwork,
    params: &ColonyParams,
    rng: &mut R,
) -> Choice {
    let seen = |n: NodeId| visited.get(n.index()).copied().unwrap_or(false);

    if let Some(link) = overlay.lookup(node, dst) {
        if !seen(link.endpoint) {
            return Choice::Overlay {
                next: link.endpoint,
                hop_length: link.hop_length,
            };
        }
    }

    let mut any_unvisited = false;
    let mut candidates: Vec<(NodeId, f64)> = Vec::new();
    for &nb in net.neighbors(node) {
        if seen(nb) {
            continue;
        }
        any_unvisited = true;
        let tau = states.tau(node, nb, dst);
        if behavior.admits(tau, params) {
            candidates.push((nb, tau));
        }
    }
    if candidates.is_empty() {
        return if any_unvisited {
            Choice::Blocked
        } else {
            Choice::DeadEnd
        };
    }
    if let Some(&(next, tau)) = candidates.iter().find(|(nb, _)| *nb == dst) {
        return Choice::Physical { next, tau };
    }

    let weights: Vec<f64> = candidates
        .iter()
        .map(|&(nb, tau)| {
            let eta = states.node(nb).eta(dst);
            tau.max(0.0).powf(params.alpha) * eta.max(0.0).powf(params.beta)
        })
        .collect();
    let total: f64 = weights.iter().sum();

    let pick = if total > 0.0 && total.is_finite() {
        let mut draw = rng.gen::<f64>() * total;
        let mut chosen = None;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                chosen = Some(i);
                if draw < w {
                    break;
                }
                draw -= w;
            }
        }
        chosen.expect("a positive total has a positive weight")
    } else {
        rng.gen_range(0..candidates.len())
    };
    let (next, tau) = candidates[pick];
    Choice::Physical { next, tau }
}

/// Walks `ant` until it arrives, dead-ends or is blocked. At every node
/// entered the node's demand estimate toward `dst` and its best hop count
/// from `src` are refreshed.
pub fn forward_walk<R: Rng + ?Sized>(
    mut ant: ForwardAnt,
    behavior: &dyn ColonyBehavior,
    states: &mut StateTable,
    overlay: &OverlayNetwork,
    net: &PhysicalNetwork,
    params: &ColonyParams,
    rng: &mut R,
) -> ForwardAnt {
    if ant.src == ant.dst {
        ant.status = AntStatus::Arrived;
        return ant;
    }
    while ant.status == AntStatus::Alive {
        let current = ant.current();
        let (next, step) = match select_next_hop(
            current,
            ant.dst,
            &ant.visited,
            behavior,
            states,
            overlay,
            net,
            params,
            rng,
        ) {
            Choice::Overlay { next, hop_length } => (next, Step::Overlay { hop_length }),
            Choice::Physical { next, tau } => (next, Step::Physical { tau }),
            Choice::DeadEnd => {
                ant.status = AntStatus::DeadEnd;
                break;
            }
            Choice::Blocked => {
                ant.status = AntStatus::Blocked;
                break;
            }
        };
        ant.advance(next, step);

        let state = states.node_mut(next);
        let d = state.demand(ant.dst);
        state
            .demand_est
            .insert(ant.dst, update_demand(d, ant.volume, params));
        let best = update_hops_from(state.hops_from(ant.src), ant.hop_count);
        state.hops_from.insert(ant.src, best);

        if next == ant.dst {
            ant.status = AntStatus::Arrived;
        }
    }
    ant
}

/// True when an arrived ant's trail is longer than `gamma` times the best hop
/// count from its source known at its destination.
pub fn classify_bad_trail(ant: &ForwardAnt, states: &StateTable, gamma: f64) -> bool {
    if ant.status != AntStatus::Arrived {
        return false;
    }
    match states.node(ant.dst).hops_from(ant.src) {
        Some(best) => f64::from(ant.hop_count) > gamma * f64::from(best),
        None => false,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardAnt {
    pub origin: ForwardAnt,
    pub bad_trail: bool,
    pub min_overlay_cost: f64,
    pub overlay_candidate: Option<NodeId>,
    pub sigma_at_candidate: f64,
    /// Intermediate nodes evaluated, in visiting order (destination side first).
    pub evaluated: Vec<NodeId>,
}

impl BackwardAnt {
    pub fn new(origin: ForwardAnt, bad_trail: bool) -> Self {
        BackwardAnt {
            origin,
            bad_trail,
            min_overlay_cost: f64::INFINITY,
            overlay_candidate: None,
            sigma_at_candidate: 0.0,
            evaluated: Vec::new(),
        }
    }
}

/// Retraces an arrived ant's path from the destination back to the source.
///
/// Each intermediate node `v` with forward successor `w` gets, in order: its
/// hop estimate to the destination, its desirability, the colony's pheromone
/// deposit on `tau(v, w, dst)`, and (unless the trail is bad) its overlay
/// value and a chance to become the overlay candidate. The source's outgoing
/// entry also receives the deposit when the first hop was a physical choice.
pub fn backward_walk(
    mut bant: BackwardAnt,
    behavior: &dyn ColonyBehavior,
    states: &mut StateTable,
    net: &PhysicalNetwork,
    params: &AntParams,
) -> Result<BackwardAnt, WalkFault> {
    let ant = &bant.origin;
    if ant.status != AntStatus::Arrived {
        return Err(WalkFault::NotArrived(ant.status));
    }
    let (src, dst, hop_count) = (ant.src, ant.dst, ant.hop_count);
    let seq = ant.full_path();
    for (k, step) in ant.steps.iter().enumerate() {
        if matches!(step, Step::Physical { .. }) && !net.has_edge(seq[k], seq[k + 1]) {
            return Err(WalkFault::NotAdjacent {
                from: seq[k],
                to: seq[k + 1],
            });
        }
    }
    let cp = &params.colony;

    let mut evaluated = Vec::new();
    let mut min_cost = bant.min_overlay_cost;
    let mut candidate = bant.overlay_candidate;
    let mut sigma_at = bant.sigma_at_candidate;

    for idx in (1..seq.len().saturating_sub(1)).rev() {
        let (v, w) = (seq[idx], seq[idx + 1]);
        let hops_from = states
            .node(v)
            .hops_from(src)
            .ok_or(WalkFault::MissingHopsFrom { node: v, src })?;
        let hops_to = update_hops_to(hop_count, hops_from)?;

        let state = states.node_mut(v);
        state.hops_to.insert(dst, hops_to);
        let eta = update_eta(
            state.eta(dst),
            params.eta_denominator.pick(hops_from, hops_to),
        );
        state.eta.insert(dst, eta);

        let tau = states.tau_mut(v, w, dst);
        *tau = behavior.deposit(*tau, bant.bad_trail, cp);
        let tau = *tau;

        if !bant.bad_trail {
            let state = states.node_mut(v);
            let cost = ant_overlay_cost(hops_from, state.demand(dst), hops_to, &params.cost);
            if let Some(sigma) = update_sigma(state.sigma, cost, cp) {
                state.sigma = sigma;
            }
            if cost <= min_cost && tau >= cp.tau_min {
                min_cost = cost;
                candidate = Some(v);
                sigma_at = state.sigma;
            }
        }
        evaluated.push(v);
    }

    // The source's own entry is refreshed only when the transition rule picked
    // the first hop; a forced overlay hop is not reinforced.
    if let (Some(&first), Some(Step::Physical { .. })) = (seq.get(1), ant.steps.first()) {
        let tau = states.tau_mut(src, first, dst);
        *tau = behavior.deposit(*tau, bant.bad_trail, cp);
    }

    bant.min_overlay_cost = min_cost;
    bant.overlay_candidate = candidate;
    bant.sigma_at_candidate = sigma_at;
    bant.evaluated = evaluated;
    Ok(bant)
}

/// Links the source to the backward ant's overlay candidate, unless there is
/// no candidate or the source already has a link toward the destination.
pub fn establish_overlay_at_source(
    bant: &BackwardAnt,
    overlay: &mut OverlayNetwork,
    net: &PhysicalNetwork,
    now: u64,
    ttl: u64,
) -> Result<Option<LogicalLink>, TopologyError> {
    match bant.overlay_candidate {
        Some(c) if c != bant.origin.src => {
            overlay.establish_link(net, bant.origin.src, c, bant.origin.dst, now, ttl)
        }
        _ => Ok(None),
    }
}

/// One row of the per-ant trace.
#[derive(Debug, Clone, PartialEq)]
pub struct AntRecord {
    pub round: u64,
    pub colony: ColonyKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub status: AntStatus,
    pub hop_count: u32,
    pub min_overlay_cost: Option<f64>,
    pub candidate: Option<NodeId>,
    pub established: bool,
}

#[cfg(test)]
mod tests;
