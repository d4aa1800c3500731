use thiserror::Error;

use crate::ants::AntParams;
use crate::colony::ColonyError;
use crate::cost::CostError;
use crate::topology::{generate_random_network, NodeId, PhysicalNetwork, TopologyError};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("rounds must be at least 1")]
    NoRounds,
    #[error("destination set is empty")]
    NoDestinations,
    #[error("source {0} is also listed as a destination")]
    SourceIsDestination(NodeId),
    #[error("node {node} does not exist in a {n}-node graph")]
    UnknownNode { node: NodeId, n: usize },
    #[error("destination {0} is listed twice")]
    DuplicateDestination(NodeId),
    #[error("no ants would be dispatched: every colony count is zero")]
    NoAnts,
    #[error("colony {0:?} is scheduled twice")]
    DuplicateColony(String),
    #[error("{name} = {value} is out of range: {expected}")]
    BadValue {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error(transparent)]
    Colony(#[from] ColonyError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
}

/// Where the physical network comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphSource {
    Generate { nodes: usize, avg_degree: f64 },
    Network(PhysicalNetwork),
}

/// Number of ants a named colony sends per destination per round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColonySchedule {
    pub name: String,
    pub count: usize,
}

impl ColonySchedule {
    pub fn new(name: impl Into<String>, count: usize) -> Self {
        ColonySchedule {
            name: name.into(),
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub graph: GraphSource,
    pub seed: u64,
    pub rounds: u64,
    pub src: NodeId,
    /// `None` means every node except the source.
    pub destinations: Option<Vec<NodeId>>,
    /// Volume carried by every forward ant.
    pub volume: f64,
    /// Dispatch order within a round follows this list.
    pub colonies: Vec<ColonySchedule>,
    pub ant: AntParams,
    /// Lifetime of a logical link, in rounds.
    pub ttl: u64,
    /// Rounds between link expiry plus global evaporation passes.
    pub evaporation_period: u64,
    /// Keep a log of every exploiter edge choice.
    pub instrument: bool,
}

impl SimConfig {
    /// The 10-node, degree-4 experiment with one ant per colony per destination.
    pub fn reference_defaults(seed: u64) -> Self {
        SimConfig {
            graph: GraphSource::Generate {
                nodes: 10,
                avg_degree: 4.0,
            },
            seed,
            rounds: 1000,
            src: NodeId(0),
            destinations: None,
            volume: 1.0,
            colonies: default_colonies(),
            ant: AntParams::default(),
            ttl: 50,
            evaporation_period: 1,
            instrument: false,
        }
    }

    pub fn build_network(&self) -> Result<PhysicalNetwork, ConfigError> {
        match &self.graph {
            GraphSource::Generate { nodes, avg_degree } => {
                Ok(generate_random_network(*nodes, *avg_degree, self.seed)?)
            }
            GraphSource::Network(net) => Ok(net.clone()),
        }
    }

    /// Destination list for `net`, sorted ascending.
    pub fn resolve_destinations(&self, net: &PhysicalNetwork) -> Vec<NodeId> {
        match &self.destinations {
            Some(list) => {
                let mut v = list.clone();
                v.sort_unstable();
                v
            }
            None => net.nodes().filter(|&n| n != self.src).collect(),
        }
    }

    /// Checks everything that does not need the colony registry.
    pub fn validate(&self, net: &PhysicalNetwork) -> Result<Vec<NodeId>, ConfigError> {
        if self.rounds == 0 {
            return Err(ConfigError::NoRounds);
        }
        let n = net.node_count();
        if !net.contains(self.src) {
            return Err(ConfigError::UnknownNode { node: self.src, n });
        }
        let dsts = self.resolve_destinations(net);
        if dsts.is_empty() {
            return Err(ConfigError::NoDestinations);
        }
        for w in dsts.windows(2) {
            if w[0] == w[1] {
                return Err(ConfigError::DuplicateDestination(w[0]));
            }
        }
        for &d in &dsts {
            if !net.contains(d) {
                return Err(ConfigError::UnknownNode { node: d, n });
            }
            if d == self.src {
                return Err(ConfigError::SourceIsDestination(d));
            }
        }
        if self.colonies.iter().map(|c| c.count).sum::<usize>() == 0 {
            return Err(ConfigError::NoAnts);
        }
        for (i, c) in self.colonies.iter().enumerate() {
            if self.colonies[..i].iter().any(|o| o.name == c.name) {
                return Err(ConfigError::DuplicateColony(c.name.clone()));
            }
        }
        if !(self.volume.is_finite() && self.volume >= 0.0) {
            return Err(ConfigError::BadValue {
                name: "volume",
                value: self.volume,
                expected: "finite and nonnegative",
            });
        }
        if !(self.ant.gamma.is_finite() && self.ant.gamma >= 1.0) {
            return Err(ConfigError::BadValue {
                name: "gamma",
                value: self.ant.gamma,
                expected: "finite and at least 1",
            });
        }
        if self.ttl == 0 {
            return Err(ConfigError::BadValue {
                name: "ttl",
                value: 0.0,
                expected: "at least 1 round",
            });
        }
        if self.evaporation_period == 0 {
            return Err(ConfigError::BadValue {
                name: "evaporation_period",
                value: 0.0,
                expected: "at least 1 round",
            });
        }
        self.ant.colony.validate()?;
        self.ant.cost.validate()?;
        Ok(dsts)
    }
}

pub fn default_colonies() -> Vec<ColonySchedule> {
    vec![
        ColonySchedule::new("positive", 1),
        ColonySchedule::new("negative", 1),
        ColonySchedule::new("exploiter", 1),
    ]
}
