//! Biobjective overlay cost: link setup cost proportional to physical hop
//! length plus transit cost proportional to demand and virtual-link count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::topology::{NodeId, OverlayNetwork, PhysicalNetwork, TransitCount};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("cost coefficient {name} = {value} must be finite and nonnegative")]
    BadCoefficient { name: &'static str, value: f64 },
    #[error("demand {i}->{j} = {value} must be finite and nonnegative")]
    BadDemand { i: NodeId, j: NodeId, value: f64 },
    #[error("demand from node {0} to itself")]
    SelfDemand(NodeId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Overlay (`c_h`) and transit (`c_t`) coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostParams {
    pub c_h: f64,
    pub c_t: f64,
}

impl CostParams {
    pub fn new(c_h: f64, c_t: f64) -> Result<Self, CostError> {
        let p = CostParams { c_h, c_t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CostError> {
        for (name, value) in [("c_h", self.c_h), ("c_t", self.c_t)] {
            if !value.is_finite() || value < 0.0 {
                return Err(CostError::BadCoefficient { name, value });
            }
        }
        Ok(())
    }
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams { c_h: 2.0, c_t: 1.0 }
    }
}

/// Demand `d_ij` on pairs `(i, j)`; a pair's presence puts `j` in `S_i`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrafficDemand {
    demand: BTreeMap<(NodeId, NodeId), f64>,
}

impl TrafficDemand {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, i: NodeId, j: NodeId, value: f64) -> Result<(), CostError> {
        if i == j {
            return Err(CostError::SelfDemand(i));
        }
        if !value.is_finite() || value < 0.0 {
            return Err(CostError::BadDemand { i, j, value });
        }
        self.demand.insert((i, j), value);
        Ok(())
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> Option<f64> {
        self.demand.get(&(i, j)).copied()
    }

    /// `S_i` with its demands, ascending by destination.
    pub fn destinations_of(&self, i: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.demand
            .range((i, NodeId(0))..=(i, NodeId(usize::MAX)))
            .map(|(&(_, j), &d)| (j, d))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.demand.iter().map(|(&(i, j), &d)| (i, j, d))
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }

    /// Demand file: one `i j d_ij` line per pair.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, j, d) in self.pairs() {
            let _ = writeln!(out, "{i} {j} {d}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, CostError> {
        let mut demand = TrafficDemand::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(CostError::Parse {
                    line,
                    msg: format!("expected `i j d_ij`, got {body:?}"),
                });
            }
            let node = |s: &str| {
                s.parse::<usize>()
                    .map(NodeId)
                    .map_err(|e| CostError::Parse {
                        line,
                        msg: format!("bad node id {s:?}: {e}"),
                    })
            };
            let i = node(fields[0])?;
            let j = node(fields[1])?;
            let d = fields[2].parse::<f64>().map_err(|e| CostError::Parse {
                line,
                msg: format!("bad demand {:?}: {e}", fields[2]),
            })?;
            if demand.get(i, j).is_some() {
                return Err(CostError::Parse {
                    line,
                    msg: format!("duplicate pair {i} {j}"),
                });
            }
            demand.set(i, j, d)?;
        }
        Ok(demand)
    }
}

/// Result of a cost evaluation. Pairs in `S_i` with no route are listed in
/// `unreachable` and contribute nothing to `finite`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostEvaluation {
    pub finite: f64,
    pub unreachable: Vec<(NodeId, NodeId)>,
}

impl CostEvaluation {
    /// The cost, or `None` when some demand pair is disconnected (infinite cost).
    pub fn value(&self) -> Option<f64> {
        self.unreachable.is_empty().then_some(self.finite)
    }

    pub fn is_infinite(&self) -> bool {
        !self.unreachable.is_empty()
    }
}

/// `C_i = sum_{j in B_i} c_h h_ij + sum_{j in S_i} c_t t_ij d_ij`.
pub fn node_cost(
    i: NodeId,
    overlay: &OverlayNetwork,
    net: &PhysicalNetwork,
    demand: &TrafficDemand,
    params: &CostParams,
) -> CostEvaluation {
    let setup: f64 = overlay
        .endpoints_of(i)
        .values()
        .map(|&h| params.c_h * f64::from(h))
        .sum();

    let mut transit = 0.0;
    let mut unreachable = Vec::new();
    let mut counts: Option<Vec<TransitCount>> = None;
    for (j, d) in demand.destinations_of(i) {
        let t = if net.contains(i) && net.contains(j) {
            counts.get_or_insert_with(|| overlay.transit_counts_from(net, i))[j.index()]
        } else {
            TransitCount::Unreachable
        };
        match t {
            TransitCount::Reachable(t) => transit += params.c_t * f64::from(t) * d,
            TransitCount::Unreachable => unreachable.push((i, j)),
        }
    }
    CostEvaluation {
        finite: setup + transit,
        unreachable,
    }
}

/// `C(G) = sum_i C_i` over every node of `net`.
pub fn total_cost(
    overlay: &OverlayNetwork,
    net: &PhysicalNetwork,
    demand: &TrafficDemand,
    params: &CostParams,
) -> CostEvaluation {
    let mut total = CostEvaluation {
        finite: 0.0,
        unreachable: Vec::new(),
    };
    for i in net.nodes() {
        let c = node_cost(i, overlay, net, demand, params);
        total.finite += c.finite;
        total.unreachable.extend(c.unreachable);
    }
    total
}

/// Cost a backward ant assigns to anchoring an overlay link at a node that is
/// `hops_to_src` from the source and `hops_to_dst` from the destination.
pub fn ant_overlay_cost(
    hops_to_src: u32,
    demand_estimate: f64,
    hops_to_dst: u32,
    params: &CostParams,
) -> f64 {
    params.c_h * f64::from(hops_to_src) + params.c_t * demand_estimate * f64::from(hops_to_dst)
}
