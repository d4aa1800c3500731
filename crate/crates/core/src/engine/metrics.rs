use std::collections::BTreeMap;

use crate::ants::{AntRecord, AntStatus};
use crate::topology::{LogicalLink, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlayEventKind {
    Created,
    Expired,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlayEvent {
    pub round: u64,
    pub kind: OverlayEventKind,
    pub owner: NodeId,
    pub endpoint: NodeId,
    pub serves_dst: NodeId,
    pub hop_length: u32,
}

impl OverlayEvent {
    pub fn new(round: u64, kind: OverlayEventKind, link: &LogicalLink) -> Self {
        OverlayEvent {
            round,
            kind,
            owner: link.owner,
            endpoint: link.endpoint,
            serves_dst: link.serves_dst,
            hop_length: link.hop_length,
        }
    }
}

/// `C(G)` at the end of a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSample {
    /// From the demand estimates held at nodes; unreachable pairs excluded.
    pub estimated: f64,
    pub unreachable: usize,
    /// Same overlay, priced with the injected per-ant volume as demand.
    pub injected: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundSummary {
    pub round: u64,
    pub dispatched: usize,
    pub arrived: usize,
    pub dead_end: usize,
    pub blocked: usize,
    pub links: usize,
    pub cost: CostSample,
}

/// An exploiter's physical edge choice and the pheromone it saw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionRecord {
    pub round: u64,
    pub dst: NodeId,
    pub from: NodeId,
    pub to: NodeId,
    pub tau: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Metrics {
    pub trace: Vec<AntRecord>,
    pub rounds: Vec<RoundSummary>,
    /// `(round, hop_count)` of every arrived ant, per destination.
    pub arrivals: BTreeMap<NodeId, Vec<(u64, u32)>>,
    pub min_hops: BTreeMap<NodeId, u32>,
    pub overlay_events: Vec<OverlayEvent>,
    pub exploiter_selections: Vec<SelectionRecord>,
    /// Exploiter steps onto an edge below `tau_min`. Always counted.
    pub no_entry_violations: usize,
    pub bad_trails: usize,
}

impl Metrics {
    pub fn dispatched(&self) -> usize {
        self.trace.len()
    }

    pub fn count(&self, status: AntStatus) -> usize {
        self.trace.iter().filter(|r| r.status == status).count()
    }

    pub(crate) fn record_arrival(&mut self, round: u64, dst: NodeId, hops: u32) {
        self.arrivals.entry(dst).or_default().push((round, hops));
        self.min_hops
            .entry(dst)
            .and_modify(|m| *m = (*m).min(hops))
            .or_insert(hops);
    }

    /// Most frequent hop count among ants that reached `dst` in the last
    /// `window` rounds; ties go to the shorter length.
    pub fn tail_mode(&self, dst: NodeId, window: u64) -> Option<u32> {
        let last = self.rounds.last()?.round;
        let first = last.saturating_sub(window) + 1;
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &(round, hops) in self.arrivals.get(&dst)? {
            if round >= first {
                *counts.entry(hops).or_default() += 1;
            }
        }
        counts
            .into_iter()
            .fold(None, |best: Option<(u32, usize)>, (h, c)| match best {
                Some((_, bc)) if bc >= c => best,
                _ => Some((h, c)),
            })
            .map(|(h, _)| h)
    }

    pub fn final_cost(&self) -> Option<CostSample> {
        self.rounds.last().map(|r| r.cost)
    }
}
