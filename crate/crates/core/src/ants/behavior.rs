//! Colony behaviors behind a common trait, looked up by name at run time.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::colony::{local_positive_update, negative_update, ColonyParams};

/// The three ant populations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ColonyKind {
    /// Explores and reinforces with positive pheromone.
    PositiveExplorer,
    /// Explores, and lays negative pheromone on bad trails.
    NegativeExplorer,
    /// Exploits the other two; never steps onto an edge below `tau_min`.
    Exploiter,
}

impl ColonyKind {
    pub const ALL: [ColonyKind; 3] = [
        ColonyKind::PositiveExplorer,
        ColonyKind::NegativeExplorer,
        ColonyKind::Exploiter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ColonyKind::PositiveExplorer => "positive",
            ColonyKind::NegativeExplorer => "negative",
            ColonyKind::Exploiter => "exploiter",
        }
    }
}

impl fmt::Display for ColonyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum RegistryError {
    #[error("unknown colony {0:?}")]
    Unknown(String),
    #[error("colony {0:?} is already registered")]
    Duplicate(String),
}

impl FromStr for ColonyKind {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ColonyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| RegistryError::Unknown(s.to_string()))
    }
}

/// How a colony picks edges and marks them.
pub trait ColonyBehavior: fmt::Debug + Send + Sync {
    fn kind(&self) -> ColonyKind;

    /// Whether a forward ant may take a physical edge carrying pheromone `tau`.
    fn admits(&self, _tau: f64, _params: &ColonyParams) -> bool {
        true
    }

    /// New pheromone for an edge the backward ant retraces.
    fn deposit(&self, tau: f64, _bad_trail: bool, params: &ColonyParams) -> f64 {
        local_positive_update(tau, params)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PositiveExplorer;

impl ColonyBehavior for PositiveExplorer {
    fn kind(&self) -> ColonyKind {
        ColonyKind::PositiveExplorer
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NegativeExplorer;

impl ColonyBehavior for NegativeExplorer {
    fn kind(&self) -> ColonyKind {
        ColonyKind::NegativeExplorer
    }

    fn deposit(&self, tau: f64, bad_trail: bool, params: &ColonyParams) -> f64 {
        if bad_trail {
            negative_update(tau, params)
        } else {
            local_positive_update(tau, params)
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Exploiter;

impl ColonyBehavior for Exploiter {
    fn kind(&self) -> ColonyKind {
        ColonyKind::Exploiter
    }

    fn admits(&self, tau: f64, params: &ColonyParams) -> bool {
        tau >= params.tau_min
    }
}

/// Name-indexed colony behaviors, in registration order.
#[derive(Debug, Clone, Default)]
pub struct ColonyRegistry {
    entries: Vec<(String, Arc<dyn ColonyBehavior>)>,
}

impl ColonyRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `positive`, `negative` and `exploiter`.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(
            ColonyKind::PositiveExplorer.name(),
            Arc::new(PositiveExplorer),
        )
        .and_then(|_| {
            reg.register(
                ColonyKind::NegativeExplorer.name(),
                Arc::new(NegativeExplorer),
            )
        })
        .and_then(|_| reg.register(ColonyKind::Exploiter.name(), Arc::new(Exploiter)))
        .expect("builtin names are distinct");
        reg
    }

    pub fn register(
        &mut self,
        name: &str,
        behavior: Arc<dyn ColonyBehavior>,
    ) -> Result<(), RegistryError> {
        if self.entries.iter().any(|(n, _)| n == name) {
            return Err(RegistryError::Duplicate(name.to_string()));
        }
        self.entries.push((name.to_string(), behavior));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ColonyBehavior>, RegistryError> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, b)| Arc::clone(b))
            .ok_or_else(|| RegistryError::Unknown(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(n, _)| n.as_str())
    }
}
