//! Physical substrate graph, random generation and exact hop-count oracles.
//!
//! The physical network is an undirected, unweighted, connected graph with
//! dense node ids. Every physical hop costs one. Logical (overlay) links live
//! in [`overlay`] and are realized as shortest physical paths.

pub mod overlay;

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use overlay::{LogicalLink, OverlayNetwork, TransitCount};

/// Dense node index in `[0, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<usize> for NodeId {
    fn from(v: usize) -> Self {
        NodeId(v)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TopologyError {
    #[error("infeasible graph: {0}")]
    Infeasible(String),
    #[error("node {node} out of range for a {n}-node graph")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("graph is not connected")]
    Disconnected,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("logical link owner and endpoint are both node {0}")]
    LinkToSelf(NodeId),
}

/// Undirected connected graph `G_u = (N, E)`.
///
/// Edges are stored canonically (`u < v`, sorted) and every adjacency list is
/// sorted ascending, which is what makes traversal tie-breaking deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhysicalNetwork {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    adjacency: Vec<Vec<NodeId>>,
}

impl PhysicalNetwork {
    /// Builds a network from an edge list, validating ids, loops, duplicates
    /// and connectivity.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::Infeasible(
                "graph needs at least one node".into(),
            ));
        }
        let mut canonical = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for node in [a, b] {
                if node >= n {
                    return Err(TopologyError::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            canonical.push((a.min(b), a.max(b)));
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(TopologyError::DuplicateEdge(w[0].0, w[0].1));
        }

        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &canonical {
            adjacency[u].push(NodeId(v));
            adjacency[v].push(NodeId(u));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let net = PhysicalNetwork {
            n,
            edges: canonical
                .into_iter()
                .map(|(u, v)| (NodeId(u), NodeId(v)))
                .collect(),
            adjacency,
        };
        if !net.is_connected() {
            return Err(TopologyError::Disconnected);
        }
        Ok(net)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        (0..self.n).map(NodeId)
    }

    /// Neighbors of `node`, ascending by id.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.index()]
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.n
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.contains(a) && self.adjacency[a.index()].binary_search(&b).is_ok()
    }

    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edges.len() as f64 / self.n as f64
    }

    fn is_connected(&self) -> bool {
        self.bfs(NodeId(0)).iter().all(Option::is_some)
    }

    fn bfs(&self, src: NodeId) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[src.index()] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u.index()].unwrap_or(0);
            for &v in self.neighbors(u) {
                if dist[v.index()].is_none() {
                    dist[v.index()] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Canonical text form: `n <count>` then one sorted `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    /// Parses the graph file format. Edge lines may appear in any order;
    /// blank lines are ignored.
    pub fn from_text(text: &str) -> Result<Self, TopologyError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let (line_no, header) = lines.next().ok_or(TopologyError::Parse {
            line: 1,
            msg: "empty graph file".into(),
        })?;
        let mut head = header.split_whitespace();
        let n = match (head.next(), head.next(), head.next()) {
            (Some("n"), Some(count), None) => {
                count.parse::<usize>().map_err(|e| TopologyError::Parse {
                    line: line_no,
                    msg: format!("bad node count {count:?}: {e}"),
                })?
            }
            _ => {
                return Err(TopologyError::Parse {
                    line: line_no,
                    msg: format!("expected `n <node_count>`, got {header:?}"),
                })
            }
        };

        let mut edges = Vec::new();
        for (line, body) in lines {
            let parts: Vec<&str> = body.split_whitespace().collect();
            if parts.len() != 2 {
                return Err(TopologyError::Parse {
                    line,
                    msg: format!("expected `u v`, got {body:?}"),
                });
            }
            let parse = |s: &str| {
                s.parse::<usize>().map_err(|e| TopologyError::Parse {
                    line,
                    msg: format!("bad node id {s:?}: {e}"),
                })
            };
            edges.push((parse(parts[0])?, parse(parts[1])?));
        }
        Self::from_edges(n, &edges)
    }

    /// Hex SHA-256 of the canonical text form.
    pub fn fingerprint(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }
}

/// Generates a connected random graph with exactly `n * avg_degree / 2` edges.
///
/// A uniform random spanning tree is grown by a random walk over the complete
/// graph (Aldous-Broder), then uniformly random non-edges are added until the
/// target edge count is met. Output depends only on `(n, avg_degree, seed)`.
pub fn generate_random_network(
    n: usize,
    avg_degree: f64,
    seed: u64,
) -> Result<PhysicalNetwork, TopologyError> {
    if n < 2 {
        return Err(TopologyError::Infeasible(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    if !avg_degree.is_finite() || avg_degree <= 0.0 {
        return Err(TopologyError::Infeasible(format!(
            "average degree {avg_degree} must be positive"
        )));
    }
    let target = n as f64 * avg_degree / 2.0;
    let m = target.round();
    if (target - m).abs() > 1e-9 {
        return Err(TopologyError::Infeasible(format!(
            "{n} nodes with average degree {avg_degree} gives a fractional edge count {target}"
        )));
    }
    let m = m as usize;
    let max_edges = n * (n - 1) / 2;
    if m < n - 1 {
        return Err(TopologyError::Infeasible(format!(
            "{m} edges cannot connect {n} nodes (need at least {})",
            n - 1
        )));
    }
    if m > max_edges {
        return Err(TopologyError::Infeasible(format!(
            "{m} edges exceed the {max_edges} possible on {n} nodes"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_tree = vec![false; n];
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::with_capacity(m);

    let mut current = rng.gen_range(0..n);
    in_tree[current] = true;
    let mut reached = 1;
    while reached < n {
        // uniform over the other n - 1 nodes
        let mut next = rng.gen_range(0..n - 1);
        if next >= current {
            next += 1;
        }
        if !in_tree[next] {
            in_tree[next] = true;
            reached += 1;
            present[current][next] = true;
            present[next][current] = true;
            edges.push((current, next));
        }
        current = next;
    }

    let mut spare: Vec<(usize, usize)> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !present[u][v])
        .collect();
    spare.shuffle(&mut rng);
    edges.extend(spare.into_iter().take(m - edges.len()));

    PhysicalNetwork::from_edges(n, &edges)
}

/// Exact minimum edge-count distance from `src` to every node, indexed by node id.
pub fn shortest_hops(net: &PhysicalNetwork, src: NodeId) -> Vec<u32> {
    net.bfs(src)
        .into_iter()
        .map(|d| d.expect("physical networks are connected by construction"))
        .collect()
}

/// A shortest physical path from `src` to `dst`, inclusive of both ends.
///
/// Breadth-first search expands neighbors in ascending id order and keeps the
/// first parent that discovers each node, so among equal-length paths the one
/// through lower ids wins.
pub fn physical_path(net: &PhysicalNetwork, src: NodeId, dst: NodeId) -> Vec<NodeId> {
    if src == dst {
        return vec![src];
    }
    let mut parent: Vec<Option<NodeId>> = vec![None; net.node_count()];
    let mut seen = vec![false; net.node_count()];
    let mut queue = VecDeque::new();
    seen[src.index()] = true;
    queue.push_back(src);
    'search: while let Some(u) = queue.pop_front() {
        for &v in net.neighbors(u) {
            if !seen[v.index()] {
                seen[v.index()] = true;
                parent[v.index()] = Some(u);
                if v == dst {
                    break 'search;
                }
                queue.push_back(v);
            }
        }
    }
    let mut path = vec![dst];
    let mut cur = dst;
    while let Some(p) = parent[cur.index()] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    debug_assert_eq!(path[0], src);
    path
}
