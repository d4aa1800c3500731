//! Destination-tagged logical links and the overlay graph `G = (N, L)`.

use std::collections::{BTreeMap, VecDeque};

use super::{physical_path, NodeId, PhysicalNetwork, TopologyError};

/// A directed virtual link from `owner` to `endpoint`, set up toward `serves_dst`
/// along a frozen shortest physical path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalLink {
    pub owner: NodeId,
    pub endpoint: NodeId,
    pub serves_dst: NodeId,
    pub physical_path: Vec<NodeId>,
    pub hop_length: u32,
    pub created_round: u64,
    pub expires_round: u64,
}

impl LogicalLink {
    pub fn snapshot_line(&self) -> String {
        format!(
            "{} {} {} {} {}",
            self.owner, self.endpoint, self.serves_dst, self.hop_length, self.expires_round
        )
    }
}

/// Minimum number of virtual links between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitCount {
    Reachable(u32),
    Unreachable,
}

impl TransitCount {
    pub fn value(self) -> Option<u32> {
        match self {
            TransitCount::Reachable(t) => Some(t),
            TransitCount::Unreachable => None,
        }
    }
}

/// Set of logical links keyed by `(owner, serves_dst)`; the key map is the
/// index, so at most one link per key exists.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OverlayNetwork {
    links: BTreeMap<(NodeId, NodeId), LogicalLink>,
}

impl OverlayNetwork {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Links in `(owner, serves_dst)` order.
    pub fn links(&self) -> impl Iterator<Item = &LogicalLink> {
        self.links.values()
    }

    pub fn lookup(&self, owner: NodeId, serves_dst: NodeId) -> Option<&LogicalLink> {
        self.links.get(&(owner, serves_dst))
    }

    /// Endpoints of the links owned by `owner` (the set `B_i`), each with the
    /// smallest hop length among links reaching it.
    pub fn endpoints_of(&self, owner: NodeId) -> BTreeMap<NodeId, u32> {
        let mut out: BTreeMap<NodeId, u32> = BTreeMap::new();
        for link in self.links.values().filter(|l| l.owner == owner) {
            out.entry(link.endpoint)
                .and_modify(|h| *h = (*h).min(link.hop_length))
                .or_insert(link.hop_length);
        }
        out
    }

    /// Sets up a link from `owner` to `endpoint` toward `serves_dst` unless the
    /// owner already has one toward that destination. Returns the new link.
    pub fn establish_link(
        &mut self,
        net: &PhysicalNetwork,
        owner: NodeId,
        endpoint: NodeId,
        serves_dst: NodeId,
        now: u64,
        ttl: u64,
    ) -> Result<Option<LogicalLink>, TopologyError> {
        if owner == endpoint {
            return Err(TopologyError::LinkToSelf(owner));
        }
        for node in [owner, endpoint, serves_dst] {
            if !net.contains(node) {
                return Err(TopologyError::NodeOutOfRange {
                    node: node.index(),
                    n: net.node_count(),
                });
            }
        }
        if self.links.contains_key(&(owner, serves_dst)) {
            return Ok(None);
        }
        let path = physical_path(net, owner, endpoint);
        let link = LogicalLink {
            owner,
            endpoint,
            serves_dst,
            hop_length: (path.len() - 1) as u32,
            physical_path: path,
            created_round: now,
            expires_round: now + ttl.max(1),
        };
        self.links.insert((owner, serves_dst), link.clone());
        Ok(Some(link))
    }

    /// Inserts a link verbatim, replacing any link under the same key.
    pub fn insert(&mut self, link: LogicalLink) {
        self.links.insert((link.owner, link.serves_dst), link);
    }

    /// Removes every link with `expires_round <= now` and returns them.
    pub fn expire_links(&mut self, now: u64) -> Vec<LogicalLink> {
        let expired: Vec<_> = self
            .links
            .iter()
            .filter(|(_, l)| l.expires_round <= now)
            .map(|(k, _)| *k)
            .collect();
        expired
            .into_iter()
            .filter_map(|k| self.links.remove(&k))
            .collect()
    }

    /// Transit counts from `src` to every node over the union of physical
    /// edges and logical links, each arc counting as one virtual link.
    pub fn transit_counts_from(&self, net: &PhysicalNetwork, src: NodeId) -> Vec<TransitCount> {
        let n = net.node_count();
        let mut logical: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for link in self.links.values() {
            logical[link.owner.index()].push(link.endpoint);
        }
        let mut dist: Vec<Option<u32>> = vec![None; n];
        let mut queue = VecDeque::new();
        dist[src.index()] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()].unwrap_or(0);
            for &v in net.neighbors(u).iter().chain(&logical[u.index()]) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist.into_iter()
            .map(|d| d.map_or(TransitCount::Unreachable, TransitCount::Reachable))
            .collect()
    }

    /// `t_ij`: minimum number of virtual links on a route from `i` to `j`.
    pub fn overlay_transit_count(
        &self,
        net: &PhysicalNetwork,
        i: NodeId,
        j: NodeId,
    ) -> TransitCount {
        if !net.contains(i) || !net.contains(j) {
            return TransitCount::Unreachable;
        }
        self.transit_counts_from(net, i)[j.index()]
    }

    /// Body lines of the overlay snapshot, one per link.
    pub fn snapshot_lines(&self) -> Vec<String> {
        self.links
            .values()
            .map(LogicalLink::snapshot_line)
            .collect()
    }

    /// Rebuilds an overlay from snapshot text. `#` lines and blank lines are
    /// skipped. Physical paths are recomputed on `net`; the creation round is
    /// taken as `expires_round - ttl`.
    pub fn parse_snapshot(
        text: &str,
        net: &PhysicalNetwork,
        ttl: u64,
    ) -> Result<Self, TopologyError> {
        let mut overlay = OverlayNetwork::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(TopologyError::Parse {
                    line,
                    msg: format!("expected 5 fields, got {}", fields.len()),
                });
            }
            let num = |s: &str| {
                s.parse::<u64>().map_err(|e| TopologyError::Parse {
                    line,
                    msg: format!("bad number {s:?}: {e}"),
                })
            };
            let owner = NodeId(num(fields[0])? as usize);
            let endpoint = NodeId(num(fields[1])? as usize);
            let serves_dst = NodeId(num(fields[2])? as usize);
            let hop_length = num(fields[3])? as u32;
            let expires_round = num(fields[4])?;
            for node in [owner, endpoint, serves_dst] {
                if !net.contains(node) {
                    return Err(TopologyError::NodeOutOfRange {
                        node: node.index(),
                        n: net.node_count(),
                    });
                }
            }
            if owner == endpoint {
                return Err(TopologyError::LinkToSelf(owner));
            }
            let path = physical_path(net, owner, endpoint);
            if path.len() as u32 - 1 != hop_length {
                return Err(TopologyError::Parse {
                    line,
                    msg: format!(
                        "hop length {hop_length} disagrees with shortest path length {}",
                        path.len() - 1
                    ),
                });
            }
            if overlay.lookup(owner, serves_dst).is_some() {
                return Err(TopologyError::Parse {
                    line,
                    msg: format!("second link for owner {owner} toward {serves_dst}"),
                });
            }
            overlay.insert(LogicalLink {
                owner,
                endpoint,
                serves_dst,
                physical_path: path,
                hop_length,
                created_round: expires_round.saturating_sub(ttl),
                expires_round,
            });
        }
        Ok(overlay)
    }
}
