//! Joint task partitioning and offloading schedules for a master server that
//! distributes a divisible task over a multi-hop edge network.
//!
//! The network graph is first reduced to a sink tree of minimum-`Σ1/R`
//! paths ([`network`]). For a fixed per-subtree transmission order every
//! node's weighted time/energy cost is linear in the allocation
//! ([`cost`]), so the min-max allocation is a small linear program
//! ([`lp`]). [`solver`] holds the exact methods (exhaustive order search,
//! subtree-parallel decomposition, proportional rescaling),
//! [`heuristics`] the pruning and genetic variants plus comparison
//! baselines, and [`harness`] the scenario runner used by the CLI.

pub mod cost;
pub mod error;
pub mod harness;
pub mod heuristics;
pub mod lp;
pub mod network;
pub mod solver;
pub mod units;

pub use cost::{Allocation, CostBreakdown, CostCoefficients, CostModel, NodeCost, Schedule, Weights};
pub use error::{Error, Result};
pub use network::{build_sink_tree, NetworkGraph, ServerParams, SinkTree};
pub use solver::Solution;
