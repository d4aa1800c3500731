//! Three-colony ant routing that converges on shortest paths while building a
//! low-cost overlay of logical links on top of a physical network.
//!
//! Modules, bottom-up:
//! - [`topology`]: physical graph, generation, BFS oracles, overlay links
//! - [`cost`]: overlay cost model
//! - [`colony`]: per-node state and its update rules
//! - [`ants`]: forward/backward ants and the colony behavior registry
//! - [`engine`]: the round-based simulation loop
//! - [`cli`]: experiment harness and output files

pub mod ants;
pub mod cli;
pub mod colony;
pub mod cost;
pub mod engine;
pub mod topology;
