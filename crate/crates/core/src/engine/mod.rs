//! Round-based simulation driver.
//!
//! Each round, every scheduled colony sends its ants from the source to every
//! destination. All forward walks of a round finish before any backward walk
//! starts. Arrived ants are classified, walked back, and may leave an overlay
//! link at the source. Periodically the overlay drops expired links and every
//! pheromone entry evaporates. A single seeded generator drives all choices in
//! a fixed order, so a configuration fully determines the run.

mod config;
mod metrics;

pub use config::{default_colonies, ColonySchedule, ConfigError, GraphSource, SimConfig};
pub use metrics::{
    CostSample, Metrics, OverlayEvent, OverlayEventKind, RoundSummary, SelectionRecord,
};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ants::{
    backward_walk, classify_bad_trail, establish_overlay_at_source, forward_walk, AntRecord,
    AntStatus, BackwardAnt, ColonyBehavior, ColonyKind, ColonyRegistry, ForwardAnt, RegistryError,
    Step, WalkFault,
};
use crate::colony::StateTable;
use crate::cost::{total_cost, CostEvaluation, CostParams, TrafficDemand};
use crate::topology::{NodeId, OverlayNetwork, PhysicalNetwork};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("round {round}: {fault}")]
    Walk { round: u64, fault: WalkFault },
    #[error("round {round}: pheromone {value} left [-{tau0}, {tau0}]")]
    PheromoneOutOfBounds { round: u64, value: f64, tau0: f64 },
}

/// A configured simulation and its evolving state.
pub struct Simulation {
    config: SimConfig,
    net: PhysicalNetwork,
    destinations: Vec<NodeId>,
    schedule: Vec<(Arc<dyn ColonyBehavior>, usize)>,
    states: StateTable,
    overlay: OverlayNetwork,
    rng: ChaCha8Rng,
    round: u64,
    metrics: Metrics,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        Self::with_registry(config, &ColonyRegistry::with_builtins())
    }

    /// Validates `config` and resolves its colony names in `registry`.
    pub fn with_registry(config: SimConfig, registry: &ColonyRegistry) -> Result<Self, SimError> {
        let net = config.build_network()?;
        let destinations = config.validate(&net)?;
        let schedule = config
            .colonies
            .iter()
            .map(|c| registry.get(&c.name).map(|b| (b, c.count)))
            .collect::<Result<Vec<_>, _>>()?;
        let states = StateTable::new(&net, &config.ant.colony, &destinations);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        // graph generation uses stream 0 of the same seed
        rng.set_stream(1);
        Ok(Simulation {
            config,
            net,
            destinations,
            schedule,
            states,
            overlay: OverlayNetwork::new(),
            rng,
            round: 0,
            metrics: Metrics::default(),
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn network(&self) -> &PhysicalNetwork {
        &self.net
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.destinations
    }

    pub fn states(&self) -> &StateTable {
        &self.states
    }

    pub fn overlay(&self) -> &OverlayNetwork {
        &self.overlay
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn into_metrics(self) -> Metrics {
        self.metrics
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.config.rounds
    }

    pub fn run_to_end(&mut self) -> Result<&Metrics, SimError> {
        while !self.is_finished() {
            self.step()?;
        }
        Ok(&self.metrics)
    }

    /// Runs one round and returns its summary.
    pub fn step(&mut self) -> Result<&RoundSummary, SimError> {
        self.round += 1;
        let round = self.round;
        let cfg = &self.config;
        let params = cfg.ant;
        let tau_min = params.colony.tau_min;

        let mut forwards: Vec<(usize, ForwardAnt)> = Vec::new();
        for (slot, (behavior, count)) in self.schedule.iter().enumerate() {
            let kind = behavior.kind();
            for &dst in &self.destinations {
                for _ in 0..*count {
                    let ant =
                        ForwardAnt::new(kind, cfg.src, dst, cfg.volume, self.net.node_count());
                    let ant = forward_walk(
                        ant,
                        behavior.as_ref(),
                        &mut self.states,
                        &self.overlay,
                        &self.net,
                        &params.colony,
                        &mut self.rng,
                    );
                    if kind == ColonyKind::Exploiter {
                        let full = ant.full_path();
                        for (k, step) in ant.steps.iter().enumerate() {
                            if let Step::Physical { tau } = *step {
                                if tau < tau_min {
                                    self.metrics.no_entry_violations += 1;
                                }
                                if cfg.instrument {
                                    self.metrics.exploiter_selections.push(SelectionRecord {
                                        round,
                                        dst,
                                        from: full[k],
                                        to: full[k + 1],
                                        tau,
                                    });
                                }
                            }
                        }
                    }
                    forwards.push((slot, ant));
                }
            }
        }

        let mut summary = RoundSummary {
            round,
            dispatched: forwards.len(),
            arrived: 0,
            dead_end: 0,
            blocked: 0,
            links: 0,
            cost: CostSample {
                estimated: 0.0,
                unreachable: 0,
                injected: 0.0,
            },
        };

        for (slot, ant) in forwards {
            let mut record = AntRecord {
                round,
                colony: ant.colony,
                src: ant.src,
                dst: ant.dst,
                status: ant.status,
                hop_count: ant.hop_count,
                min_overlay_cost: None,
                candidate: None,
                established: false,
            };
            match ant.status {
                AntStatus::Arrived => {
                    summary.arrived += 1;
                    self.metrics.record_arrival(round, ant.dst, ant.hop_count);
                    let bad = classify_bad_trail(&ant, &self.states, params.gamma);
                    if bad {
                        self.metrics.bad_trails += 1;
                    }
                    let behavior = Arc::clone(&self.schedule[slot].0);
                    let bant = backward_walk(
                        BackwardAnt::new(ant, bad),
                        behavior.as_ref(),
                        &mut self.states,
                        &self.net,
                        &params,
                    )
                    .map_err(|fault| SimError::Walk { round, fault })?;
                    let link = establish_overlay_at_source(
                        &bant,
                        &mut self.overlay,
                        &self.net,
                        round,
                        cfg.ttl,
                    )
                    .map_err(|e| SimError::Walk {
                        round,
                        fault: e.into(),
                    })?;
                    record.min_overlay_cost = bant
                        .min_overlay_cost
                        .is_finite()
                        .then_some(bant.min_overlay_cost);
                    record.candidate = bant.overlay_candidate;
                    if let Some(link) = link {
                        record.established = true;
                        self.metrics.overlay_events.push(OverlayEvent::new(
                            round,
                            OverlayEventKind::Created,
                            &link,
                        ));
                    }
                }
                AntStatus::DeadEnd => summary.dead_end += 1,
                AntStatus::Blocked => summary.blocked += 1,
                AntStatus::Alive => unreachable!("forward walks always terminate"),
            }
            self.metrics.trace.push(record);
        }

        if round.is_multiple_of(cfg.evaporation_period) {
            for link in self.overlay.expire_links(round) {
                self.metrics.overlay_events.push(OverlayEvent::new(
                    round,
                    OverlayEventKind::Expired,
                    &link,
                ));
            }
            self.states.evaporate_all(&params.colony);
            let tau0 = params.colony.tau0;
            if let Some((lo, hi)) = self.states.pheromone_range() {
                for value in [lo, hi] {
                    if value.abs() > tau0 {
                        return Err(SimError::PheromoneOutOfBounds { round, value, tau0 });
                    }
                }
            }
        }

        summary.links = self.overlay.len();
        summary.cost = sample_total_cost(
            &self.states,
            &self.overlay,
            &self.net,
            &self.config,
            &self.destinations,
        );
        self.metrics.rounds.push(summary);
        Ok(self.metrics.rounds.last().expect("just pushed"))
    }
}

/// Runs `config` to completion with the builtin colonies.
pub fn run(config: SimConfig) -> Result<Metrics, SimError> {
    let mut sim = Simulation::new(config)?;
    sim.run_to_end()?;
    Ok(sim.into_metrics())
}

/// Demand table for the configured `(src, dst)` pairs, valued by the estimate
/// the source node holds toward each destination.
pub fn estimated_demand(
    states: &StateTable,
    src: NodeId,
    destinations: &[NodeId],
) -> TrafficDemand {
    let mut demand = TrafficDemand::new();
    for &dst in destinations {
        let d = states.node(src).demand(dst);
        demand
            .set(src, dst, d)
            .expect("estimates are finite and nonnegative");
    }
    demand
}

/// `C(G)` for the current overlay, from node-held demand estimates and,
/// separately, from the injected per-ant volume.
pub fn sample_total_cost(
    states: &StateTable,
    overlay: &OverlayNetwork,
    net: &PhysicalNetwork,
    config: &SimConfig,
    destinations: &[NodeId],
) -> CostSample {
    let cost: &CostParams = &config.ant.cost;
    let estimated: CostEvaluation = total_cost(
        overlay,
        net,
        &estimated_demand(states, config.src, destinations),
        cost,
    );
    let mut injected_demand = TrafficDemand::new();
    for &dst in destinations {
        injected_demand
            .set(config.src, dst, config.volume)
            .expect("volume validated as finite and nonnegative");
    }
    let injected = total_cost(overlay, net, &injected_demand, cost);
    CostSample {
        estimated: estimated.finite,
        unreachable: estimated.unreachable.len(),
        injected: injected.finite,
    }
}
