use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{global_evaporate, ColonyParams};
use crate::topology::{NodeId, PhysicalNetwork};

/// `tau(neighbor, dst)` entries held by one node. Missing entries read as `tau0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PheromoneTable {
    entries: BTreeMap<(NodeId, NodeId), f64>,
}

impl PheromoneTable {
    pub fn get(&self, neighbor: NodeId, dst: NodeId) -> Option<f64> {
        self.entries.get(&(neighbor, dst)).copied()
    }

    pub fn entry(&mut self, neighbor: NodeId, dst: NodeId, tau0: f64) -> &mut f64 {
        self.entries.entry((neighbor, dst)).or_insert(tau0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.entries.iter().map(|(&(nb, dst), &v)| (nb, dst, v))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.entries.values_mut()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Everything one node remembers between ant visits.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub pheromone: PheromoneTable,
    /// Desirability toward each destination; absent means 0.
    pub eta: BTreeMap<NodeId, f64>,
    pub sigma: f64,
    /// Smoothed volume passing through toward each destination; absent means 0.
    pub demand_est: BTreeMap<NodeId, f64>,
    /// Best known hop count from each source; absent means infinity.
    pub hops_from: BTreeMap<NodeId, u32>,
    /// Latest estimate of hops remaining to each destination; absent means infinity.
    pub hops_to: BTreeMap<NodeId, u32>,
}

impl NodeState {
    pub fn new(params: &ColonyParams) -> Self {
        NodeState {
            pheromone: PheromoneTable::default(),
            eta: BTreeMap::new(),
            sigma: params.sigma0,
            demand_est: BTreeMap::new(),
            hops_from: BTreeMap::new(),
            hops_to: BTreeMap::new(),
        }
    }

    pub fn eta(&self, dst: NodeId) -> f64 {
        self.eta.get(&dst).copied().unwrap_or(0.0)
    }

    pub fn demand(&self, dst: NodeId) -> f64 {
        self.demand_est.get(&dst).copied().unwrap_or(0.0)
    }

    pub fn hops_from(&self, src: NodeId) -> Option<u32> {
        self.hops_from.get(&src).copied()
    }

    pub fn hops_to(&self, dst: NodeId) -> Option<u32> {
        self.hops_to.get(&dst).copied()
    }
}

/// Node states of a whole network, indexed by node id.
#[derive(Debug, Clone, PartialEq)]
pub struct StateTable {
    nodes: Vec<NodeState>,
    tau0: f64,
}

impl StateTable {
    /// Fresh state with a `tau0` entry for every physical neighbor toward every
    /// destination in `destinations`.
    pub fn new(net: &PhysicalNetwork, params: &ColonyParams, destinations: &[NodeId]) -> Self {
        let mut nodes = vec![NodeState::new(params); net.node_count()];
        for node in net.nodes() {
            let table = &mut nodes[node.index()].pheromone;
            for &nb in net.neighbors(node) {
                for &dst in destinations {
                    table.entry(nb, dst, params.tau0);
                }
            }
        }
        StateTable {
            nodes,
            tau0: params.tau0,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: NodeId) -> &NodeState {
        &self.nodes[id.index()]
    }

    pub fn node_mut(&mut self, id: NodeId) -> &mut NodeState {
        &mut self.nodes[id.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &NodeState)> {
        self.nodes.iter().enumerate().map(|(i, s)| (NodeId(i), s))
    }

    pub fn tau(&self, node: NodeId, neighbor: NodeId, dst: NodeId) -> f64 {
        self.nodes[node.index()]
            .pheromone
            .get(neighbor, dst)
            .unwrap_or(self.tau0)
    }

    pub fn tau_mut(&mut self, node: NodeId, neighbor: NodeId, dst: NodeId) -> &mut f64 {
        let tau0 = self.tau0;
        self.nodes[node.index()]
            .pheromone
            .entry(neighbor, dst, tau0)
    }

    /// Applies global evaporation to every pheromone entry of every node.
    pub fn evaporate_all(&mut self, params: &ColonyParams) {
        for state in &mut self.nodes {
            for tau in state.pheromone.values_mut() {
                *tau = global_evaporate(*tau, params);
            }
        }
    }

    /// Smallest and largest pheromone value held anywhere.
    pub fn pheromone_range(&self) -> Option<(f64, f64)> {
        self.nodes
            .iter()
            .flat_map(|s| s.pheromone.iter().map(|(_, _, v)| v))
            .fold(None, |acc, v| match acc {
                None => Some((v, v)),
                Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
            })
    }

    /// Text dump: a `node <id>` header, then `tau`, `eta`, `sigma`, `d` and
    /// `hops_from` lines. Reals carry 9 significant digits.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for (id, s) in self.iter() {
            let _ = writeln!(out, "node {id}");
            for (nb, dst, v) in s.pheromone.iter() {
                let _ = writeln!(out, "tau {nb} {dst} {}", sig9(v));
            }
            for (dst, v) in &s.eta {
                let _ = writeln!(out, "eta {dst} {}", sig9(*v));
            }
            let _ = writeln!(out, "sigma {}", sig9(s.sigma));
            for (dst, v) in &s.demand_est {
                let _ = writeln!(out, "d {dst} {}", sig9(*v));
            }
            for (src, v) in &s.hops_from {
                let _ = writeln!(out, "hops_from {src} {v}");
            }
        }
        out
    }
}

pub(crate) fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}
