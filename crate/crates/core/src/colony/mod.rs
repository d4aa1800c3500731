//! Per-node adaptive state and the pure update rules applied to it by ants
//! and by periodic node activity.

mod state;

pub use state::{NodeState, PheromoneTable, StateTable};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ColonyError {
    #[error("parameter {name} = {value} is out of range: {expected}")]
    BadParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("hop count {hop_count} is smaller than the hops already walked ({hops_from}); node state is corrupt")]
    NegativeHopsToDst { hop_count: u32, hops_from: u32 },
    #[error("unknown eta denominator {0:?} (expected `to-dst` or `to-src`)")]
    UnknownEtaDenominator(String),
}

/// Which hop estimate sets a node's desirability toward a destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaDenominator {
    /// `1 / hops(node, dst)`.
    #[default]
    ToDst,
    /// `1 / hops(node, src)`, the original form of the rule.
    ToSrc,
}

impl EtaDenominator {
    pub fn pick(self, hops_to_src: u32, hops_to_dst: u32) -> u32 {
        match self {
            EtaDenominator::ToDst => hops_to_dst,
            EtaDenominator::ToSrc => hops_to_src,
        }
    }
}

impl fmt::Display for EtaDenominator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EtaDenominator::ToDst => "to-dst",
            EtaDenominator::ToSrc => "to-src",
        })
    }
}

impl FromStr for EtaDenominator {
    type Err = ColonyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "to-dst" => Ok(EtaDenominator::ToDst),
            "to-src" => Ok(EtaDenominator::ToSrc),
            other => Err(ColonyError::UnknownEtaDenominator(other.to_string())),
        }
    }
}

/// Pheromone, heuristic and overlay-value parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColonyParams {
    pub alpha: f64,
    pub beta: f64,
    /// Local evaporation rate, also the demand and overlay-value smoothing rate.
    pub rho: f64,
    pub rho_g: f64,
    pub rho_n: f64,
    pub tau0: f64,
    /// No-entry threshold. A value at or below `-tau0` disables the filter.
    pub tau_min: f64,
    pub q: f64,
    pub sigma0: f64,
}

impl Default for ColonyParams {
    fn default() -> Self {
        ColonyParams {
            alpha: 1.0,
            beta: 3.0,
            rho: 0.05,
            rho_g: 0.02,
            rho_n: 0.02,
            tau0: 0.1,
            tau_min: 0.01,
            q: 100.0,
            sigma0: 0.1,
        }
    }
}

impl ColonyParams {
    pub fn validate(&self) -> Result<(), ColonyError> {
        let bad = |name, value, expected| {
            Err(ColonyError::BadParameter {
                name,
                value,
                expected,
            })
        };
        for (name, value) in [
            ("rho", self.rho),
            ("rho_g", self.rho_g),
            ("rho_n", self.rho_n),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return bad(name, value, "a rate in (0, 1)");
            }
        }
        for (name, value) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(value.is_finite() && value >= 0.0) {
                return bad(name, value, "finite and nonnegative");
            }
        }
        for (name, value) in [("tau0", self.tau0), ("q", self.q), ("sigma0", self.sigma0)] {
            if !(value.is_finite() && value > 0.0) {
                return bad(name, value, "finite and positive");
            }
        }
        if !(self.tau_min.is_finite() && self.tau_min < self.tau0) {
            return bad("tau_min", self.tau_min, "finite and below tau0");
        }
        Ok(())
    }
}

/// `(1 - rho) tau + rho tau0`.
///
/// Evaluated as `tau0 + (1 - rho)(tau - tau0)` so that `tau0` is an exact fixed
/// point and no rounding pushes an entry above `tau0`.
pub fn local_positive_update(tau: f64, params: &ColonyParams) -> f64 {
    params.tau0 + (1.0 - params.rho) * (tau - params.tau0)
}

/// Negative marking: `-((1 - rho_n) tau + rho_n tau0)`.
pub fn negative_update(tau: f64, params: &ColonyParams) -> f64 {
    -(params.tau0 + (1.0 - params.rho_n) * (tau - params.tau0))
}

/// Global evaporation `(1 - rho_g) tau`; shrinks magnitude for either sign.
pub fn global_evaporate(tau: f64, params: &ColonyParams) -> f64 {
    (1.0 - params.rho_g) * tau
}

/// Exponential average of the volume carried toward a destination.
pub fn update_demand(d: f64, volume: f64, params: &ColonyParams) -> f64 {
    (1.0 - params.rho) * d + params.rho * volume
}

/// Best known hop count from a source; `None` is infinity.
pub fn update_hops_from(current: Option<u32>, hop_count: u32) -> u32 {
    current.map_or(hop_count, |c| c.min(hop_count))
}

/// `max(eta, 1 / denominator)`; a zero denominator leaves `eta` unchanged.
pub fn update_eta(eta: f64, denominator: u32) -> f64 {
    if denominator == 0 {
        eta
    } else {
        eta.max(1.0 / f64::from(denominator))
    }
}

/// `max(sigma0, (1 - rho) sigma + rho Q / cost)`, or `None` when `cost <= 0`.
pub fn update_sigma(sigma: f64, cost: f64, params: &ColonyParams) -> Option<f64> {
    // NaN lands here too
    if cost.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return None;
    }
    Some(
        params
            .sigma0
            .max((1.0 - params.rho) * sigma + params.rho * (params.q / cost)),
    )
}

/// Remaining hops to the destination: `hop_count - hops_from`.
pub fn update_hops_to(hop_count: u32, hops_from: u32) -> Result<u32, ColonyError> {
    hop_count
        .checked_sub(hops_from)
        .ok_or(ColonyError::NegativeHopsToDst {
            hop_count,
            hops_from,
        })
}
